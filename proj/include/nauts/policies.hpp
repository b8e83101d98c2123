#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nauts/core.hpp"

namespace nauts {

enum class PolicyKind { kMaxSpeed, kObstacleAvoidance, kMinSteering, kAdaptive, kNoBias };

inline constexpr std::size_t kPolicyKindCount = 5;

std::string_view policy_name(PolicyKind kind) noexcept;
/// Throws std::invalid_argument for unknown names.
PolicyKind policy_kind_from_name(std::string_view name);

struct PolicyId {
  std::size_t index = 0;
  PolicyKind kind = PolicyKind::kMaxSpeed;
  std::string_view name() const noexcept { return policy_name(kind); }
};

/// Obstacle as seen from the robot: bearing relative to the heading and
/// clearance to the obstacle surface (robot footprint already subtracted).
struct PolarObstacle {
  double bearing = 0.0;
  double distance = 0.0;
};

/// Ground-truth inputs a policy acts on. Produced by the simulator.
struct SensedEnvironment {
  double goal_bearing = 0.0;
  double goal_distance = 0.0;
  std::vector<PolarObstacle> obstacles;
  double terrain_ruggedness = 0.0;
  double time = 0.0;  // simulated seconds, drives the no-bias resampling clock

  bool valid() const noexcept;
};

struct PolicyParams {
  ActuatorLimits limits{};
  double goal_gain = 1.0;

  // obstacle_avoidance / adaptive steering
  double cruise_speed = 1.0;
  double repulse_gain = 0.6;
  double slow_distance = 2.0;
  double contact_distance = 0.0;
  double slow_half_angle = kPi / 3.0;
  double min_repulse_distance = 0.1;

  // min_steering
  double min_steer_speed = 0.75;
  double min_steer_cap = 0.4;
  double lookahead = 3.0;
  double min_steer_gain = 0.8;

  // adaptive
  double ruggedness_slowdown = 0.8;

  // no_bias
  double resample_period = 2.0;
};

Behavior policy_max_speed(const RobotState& s, const SensedEnvironment& env, const PolicyParams& p = {});
Behavior policy_obstacle_avoidance(const RobotState& s, const SensedEnvironment& env,
                                   const PolicyParams& p = {});
Behavior policy_min_steering(const RobotState& s, const SensedEnvironment& env, const PolicyParams& p = {});
Behavior policy_adaptive(const RobotState& s, const SensedEnvironment& env, const PolicyParams& p = {});
Behavior policy_no_bias(const RobotState& s, const SensedEnvironment& env, std::uint64_t seed,
                        const PolicyParams& p = {});

/// Simplex weights the no-bias policy uses for (max_speed, obstacle_avoidance,
/// min_steering, adaptive) during resampling epoch `epoch`.
std::array<double, 4> no_bias_weights(std::uint64_t seed, std::uint64_t epoch);

/// Convex combination of the four base-policy outputs.
Behavior mix_behaviors(const std::array<Behavior, 4>& outputs, const std::array<double, 4>& weights);

/// Ordered set of N >= 2 distinct policies.
class PolicyLibrary {
 public:
  explicit PolicyLibrary(std::vector<PolicyKind> kinds, PolicyParams params = {});
  static PolicyLibrary standard(PolicyParams params = {});
  static PolicyLibrary from_names(const std::vector<std::string>& names, PolicyParams params = {});

  std::size_t size() const noexcept { return kinds_.size(); }
  PolicyId id(std::size_t index) const;
  const std::vector<PolicyKind>& kinds() const noexcept { return kinds_; }
  const PolicyParams& params() const noexcept { return params_; }
  /// Index of `kind` in the library, or size() if absent.
  std::size_t find(PolicyKind kind) const noexcept;

  Behavior act(std::size_t index, const RobotState& s, const SensedEnvironment& env,
               std::uint64_t seed) const;

 private:
  std::vector<PolicyKind> kinds_;
  PolicyParams params_;
};

Behavior act(PolicyKind kind, const RobotState& s, const SensedEnvironment& env, std::uint64_t seed,
             const PolicyParams& p);

}  // namespace nauts
