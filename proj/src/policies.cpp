#include "nauts/policies.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace nauts {
namespace {

constexpr std::array<std::string_view, kPolicyKindCount> kNames{
    "max_speed", "obstacle_avoidance", "min_steering", "adaptive", "no_bias"};

double clamp_sym(double v, double cap) { return std::clamp(v, -cap, cap); }

// Obstacles on the left (bearing >= 0) push the robot to the right.
double side(double bearing) { return bearing >= 0.0 ? 1.0 : -1.0; }

double potential_field_turn(const SensedEnvironment& env, const PolicyParams& p) {
  double w = p.goal_gain * env.goal_bearing;
  for (const auto& ob : env.obstacles) {
    if (std::abs(ob.bearing) >= kPi / 2.0) continue;
    const double d = std::max(ob.distance, p.min_repulse_distance);
    w -= p.repulse_gain * side(ob.bearing) * std::cos(ob.bearing) / (d * d);
  }
  return clamp_sym(w, p.limits.w_max);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::string_view policy_name(PolicyKind kind) noexcept { return kNames[static_cast<std::size_t>(kind)]; }

PolicyKind policy_kind_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<PolicyKind>(i);
  }
  throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

bool SensedEnvironment::valid() const noexcept {
  if (!std::isfinite(goal_bearing) || !std::isfinite(goal_distance) || goal_distance < 0.0) return false;
  if (!(terrain_ruggedness >= 0.0 && terrain_ruggedness <= 1.0)) return false;
  return std::all_of(obstacles.begin(), obstacles.end(), [](const PolarObstacle& o) {
    return std::isfinite(o.bearing) && std::isfinite(o.distance) && o.distance >= 0.0;
  });
}

Behavior policy_max_speed(const RobotState&, const SensedEnvironment& env, const PolicyParams& p) {
  return Behavior{p.limits.v_max, clamp_sym(p.goal_gain * env.goal_bearing, p.limits.w_max)};
}

Behavior policy_obstacle_avoidance(const RobotState&, const SensedEnvironment& env, const PolicyParams& p) {
  double nearest = std::numeric_limits<double>::infinity();
  for (const auto& ob : env.obstacles) {
    if (std::abs(ob.bearing) < p.slow_half_angle) nearest = std::min(nearest, ob.distance);
  }
  double scale = 1.0;
  if (std::isfinite(nearest)) {
    scale = std::clamp((nearest - p.contact_distance) / (p.slow_distance - p.contact_distance), 0.0, 1.0);
  }
  const double v = std::min(p.cruise_speed, p.limits.v_max) * scale;
  return Behavior{v, potential_field_turn(env, p)};
}

Behavior policy_min_steering(const RobotState&, const SensedEnvironment& env, const PolicyParams& p) {
  double w = p.goal_gain * env.goal_bearing;
  for (const auto& ob : env.obstacles) {
    if (std::abs(ob.bearing) >= kPi / 2.0 || ob.distance >= p.lookahead) continue;
    // Ramps in from zero at the lookahead distance.
    w -= p.min_steer_gain * side(ob.bearing) * (1.0 - ob.distance / p.lookahead);
  }
  const double cap = std::min(p.min_steer_cap, p.limits.w_max);
  return Behavior{std::min(p.min_steer_speed, p.limits.v_max), clamp_sym(w, cap)};
}

Behavior policy_adaptive(const RobotState&, const SensedEnvironment& env, const PolicyParams& p) {
  const double rug = std::clamp(env.terrain_ruggedness, 0.0, 1.0);
  return Behavior{p.limits.v_max * (1.0 - p.ruggedness_slowdown * rug), potential_field_turn(env, p)};
}

std::array<double, 4> no_bias_weights(std::uint64_t seed, std::uint64_t epoch) {
  std::mt19937_64 rng(splitmix64(seed ^ splitmix64(epoch + 0x51ed270b27bdULL)));
  std::exponential_distribution<double> expo(1.0);
  std::array<double, 4> w{};
  double sum = 0.0;
  for (auto& x : w) {
    x = expo(rng);
    sum += x;
  }
  for (auto& x : w) x /= sum;
  return w;
}

Behavior mix_behaviors(const std::array<Behavior, 4>& outputs, const std::array<double, 4>& weights) {
  Behavior out{0.0, 0.0};
  for (std::size_t i = 0; i < 4; ++i) {
    out.linear += weights[i] * outputs[i].linear;
    out.angular += weights[i] * outputs[i].angular;
  }
  return out;
}

Behavior policy_no_bias(const RobotState& s, const SensedEnvironment& env, std::uint64_t seed,
                        const PolicyParams& p) {
  const auto epoch = static_cast<std::uint64_t>(std::max(0.0, std::floor(env.time / p.resample_period)));
  const std::array<Behavior, 4> base{policy_max_speed(s, env, p), policy_obstacle_avoidance(s, env, p),
                                     policy_min_steering(s, env, p), policy_adaptive(s, env, p)};
  Behavior b = mix_behaviors(base, no_bias_weights(seed, epoch));
  // Rounding can push a convex combination an ulp past the hull.
  return p.limits.clamp(b);
}

Behavior act(PolicyKind kind, const RobotState& s, const SensedEnvironment& env, std::uint64_t seed,
             const PolicyParams& p) {
  switch (kind) {
    case PolicyKind::kMaxSpeed: return policy_max_speed(s, env, p);
    case PolicyKind::kObstacleAvoidance: return policy_obstacle_avoidance(s, env, p);
    case PolicyKind::kMinSteering: return policy_min_steering(s, env, p);
    case PolicyKind::kAdaptive: return policy_adaptive(s, env, p);
    case PolicyKind::kNoBias: return policy_no_bias(s, env, seed, p);
  }
  return {};
}

PolicyLibrary::PolicyLibrary(std::vector<PolicyKind> kinds, PolicyParams params)
    : kinds_(std::move(kinds)), params_(params) {
  if (kinds_.empty()) throw std::invalid_argument("PolicyLibrary: at least one policy required");
  std::set<PolicyKind> seen(kinds_.begin(), kinds_.end());
  if (seen.size() != kinds_.size()) throw std::invalid_argument("PolicyLibrary: duplicate policy");
}

PolicyLibrary PolicyLibrary::standard(PolicyParams params) {
  return PolicyLibrary({PolicyKind::kMaxSpeed, PolicyKind::kObstacleAvoidance, PolicyKind::kMinSteering,
                        PolicyKind::kAdaptive, PolicyKind::kNoBias},
                       params);
}

PolicyLibrary PolicyLibrary::from_names(const std::vector<std::string>& names, PolicyParams params) {
  std::vector<PolicyKind> kinds;
  kinds.reserve(names.size());
  for (const auto& n : names) kinds.push_back(policy_kind_from_name(n));
  return PolicyLibrary(std::move(kinds), params);
}

PolicyId PolicyLibrary::id(std::size_t index) const {
  if (index >= kinds_.size()) throw std::out_of_range("PolicyLibrary: index out of range");
  return PolicyId{index, kinds_[index]};
}

std::size_t PolicyLibrary::find(PolicyKind kind) const noexcept {
  return static_cast<std::size_t>(std::find(kinds_.begin(), kinds_.end(), kind) - kinds_.begin());
}

Behavior PolicyLibrary::act(std::size_t index, const RobotState& s, const SensedEnvironment& env,
                            std::uint64_t seed) const {
  return nauts::act(id(index).kind, s, env, seed, params_);
}

}  // namespace nauts
