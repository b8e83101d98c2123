#include "nauts/core.hpp"

#include <algorithm>
#include <limits>

namespace nauts {

double normalize_angle(double theta) {
  if (!std::isfinite(theta)) {
    throw std::invalid_argument("normalize_angle: non-finite angle");
  }
  double r = std::remainder(theta, kTwoPi);
  // remainder() yields [-pi, pi]; odd multiples of pi can land a rounding
  // error above -pi, so both are folded onto +pi.
  if (r <= -kPi + 4.0 * std::numeric_limits<double>::epsilon() * kPi) {
    r += kTwoPi;
  }
  if (r > kPi) r = kPi;
  return r;
}

RobotState RobotState::make(double x, double y, double heading) {
  if (!std::isfinite(x) || !std::isfinite(y)) {
    throw std::invalid_argument("RobotState: non-finite coordinates");
  }
  return RobotState{x, y, normalize_angle(heading)};
}

bool RobotState::valid() const noexcept {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(heading) && heading > -kPi &&
         heading <= kPi;
}

Behavior ActuatorLimits::clamp(const Behavior& b) const noexcept {
  const double v = std::isfinite(b.linear) ? std::clamp(b.linear, 0.0, v_max) : 0.0;
  const double w = std::isfinite(b.angular) ? std::clamp(b.angular, -w_max, w_max) : 0.0;
  return Behavior{v, w};
}

Goal relative_displacement(const RobotState& from, const RobotState& to) {
  return Goal{to.x - from.x, to.y - from.y};
}

Goal to_body_frame(const Goal& world, double heading) {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  return Goal{c * world.dx + s * world.dy, -s * world.dx + c * world.dy};
}

ObservationVector::ObservationVector(std::vector<double> features) : features_(std::move(features)) {
  if (features_.empty()) {
    throw std::invalid_argument("ObservationVector: empty feature vector");
  }
  if (features_[0] != 1.0) {
    throw std::invalid_argument("ObservationVector: entry 0 must be the bias 1.0");
  }
  for (std::size_t i = 1; i < features_.size(); ++i) {
    const double f = features_[i];
    if (!std::isfinite(f) || f < 0.0 || f > 1.0) {
      throw std::invalid_argument("ObservationVector: feature " + std::to_string(i) +
                                  " outside [0, 1]");
    }
  }
}

ObservationVector ObservationVector::bias_only(std::size_t q) {
  std::vector<double> f(std::max<std::size_t>(q, 1), 0.0);
  f[0] = 1.0;
  return ObservationVector(std::move(f));
}

double ObservationVector::squared_norm() const noexcept {
  double s = 0.0;
  for (double f : features_) s += f * f;
  return s;
}

bool Trajectory::consistent() const noexcept {
  if (states.size() != behaviors.size() + 1) return false;
  return std::all_of(states.begin(), states.end(), [](const RobotState& s) { return s.valid(); }) &&
         std::all_of(behaviors.begin(), behaviors.end(), [](const Behavior& b) { return b.finite(); });
}

}  // namespace nauts
