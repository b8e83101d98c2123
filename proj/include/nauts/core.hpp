#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nauts {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Raised when an iterative numeric routine cannot produce a usable result
/// (singular systems, divergence, non-finite objective values).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Wraps an angle into (-pi, pi]. Throws std::invalid_argument on NaN/inf.
double normalize_angle(double theta);

/// Planar pose. Heading is kept in (-pi, pi].
struct RobotState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  static RobotState make(double x, double y, double heading);
  bool valid() const noexcept;
  friend bool operator==(const RobotState&, const RobotState&) = default;
};

/// Commanded (or executed) body velocities.
struct Behavior {
  double linear = 0.0;   // m/s
  double angular = 0.0;  // rad/s

  bool finite() const noexcept { return std::isfinite(linear) && std::isfinite(angular); }
  double squared_norm() const noexcept { return linear * linear + angular * angular; }
  friend bool operator==(const Behavior&, const Behavior&) = default;
};

struct ActuatorLimits {
  double v_max = 2.0;
  double w_max = 1.5;

  bool admits(const Behavior& b) const noexcept {
    return b.finite() && b.linear >= 0.0 && b.linear <= v_max && std::abs(b.angular) <= w_max;
  }
  Behavior clamp(const Behavior& b) const noexcept;
};

/// Relative displacement towards a target, in whatever frame the caller uses.
struct Goal {
  double dx = 0.0;
  double dy = 0.0;

  double norm() const noexcept { return std::hypot(dx, dy); }
  double bearing() const noexcept { return std::atan2(dy, dx); }
  bool finite() const noexcept { return std::isfinite(dx) && std::isfinite(dy); }
  friend bool operator==(const Goal&, const Goal&) = default;
};

Goal relative_displacement(const RobotState& from, const RobotState& to);

/// Expresses a world-frame displacement in the body frame of a robot with the
/// given heading.
Goal to_body_frame(const Goal& world, double heading);

/// Terrain feature descriptor. Entry 0 is the constant bias 1.0, the rest lie
/// in [0, 1].
class ObservationVector {
 public:
  ObservationVector() = default;
  /// Validates and takes ownership. Throws std::invalid_argument.
  explicit ObservationVector(std::vector<double> features);

  /// Bias followed by q-1 zeros.
  static ObservationVector bias_only(std::size_t q);

  std::size_t dim() const noexcept { return features_.size(); }
  std::span<const double> features() const noexcept { return features_; }
  double operator[](std::size_t i) const { return features_[i]; }
  double squared_norm() const noexcept;

  friend bool operator==(const ObservationVector&, const ObservationVector&) = default;

 private:
  std::vector<double> features_;
};

/// T+1 states and T behaviors.
struct Trajectory {
  std::vector<RobotState> states;
  std::vector<Behavior> behaviors;

  bool consistent() const noexcept;
};

}  // namespace nauts
