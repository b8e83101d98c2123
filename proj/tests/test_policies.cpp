#include <random>

#include <gtest/gtest.h>

#include "nauts/policies.hpp"

namespace nauts {
namespace {

SensedEnvironment goal_at(double bearing, double distance = 10.0) {
  SensedEnvironment e;
  e.goal_bearing = bearing;
  e.goal_distance = distance;
  return e;
}

const RobotState kOrigin{};

TEST(MaxSpeed, Examples) {
  EXPECT_EQ(policy_max_speed(kOrigin, goal_at(0.0)), (Behavior{2.0, 0.0}));
  EXPECT_EQ(policy_max_speed(kOrigin, goal_at(0.2)), (Behavior{2.0, 0.2}));
  EXPECT_EQ(policy_max_speed(kOrigin, goal_at(kPi)), (Behavior{2.0, 1.5}));
}

TEST(ObstacleAvoidance, Examples) {
  const PolicyParams p;
  EXPECT_EQ(policy_obstacle_avoidance(kOrigin, goal_at(0.0)), (Behavior{p.cruise_speed, 0.0}));

  auto contact = goal_at(0.0);
  contact.obstacles.push_back({0.0, p.contact_distance});
  EXPECT_EQ(policy_obstacle_avoidance(kOrigin, contact).linear, 0.0);

  auto left = goal_at(0.0);
  left.obstacles.push_back({0.3, 2.0});
  const Behavior b = policy_obstacle_avoidance(kOrigin, left);
  EXPECT_LT(b.angular, 0.0);
  EXPECT_NEAR(b.angular, -p.repulse_gain * std::cos(0.3) / 4.0, 1e-12);
}

TEST(MinSteering, Examples) {
  EXPECT_EQ(policy_min_steering(kOrigin, goal_at(0.0)), (Behavior{0.75, 0.0}));

  auto near = goal_at(0.0);
  near.obstacles.push_back({0.05, 2.5});
  const Behavior b = policy_min_steering(kOrigin, near);
  EXPECT_NE(b.angular, 0.0);
  EXPECT_LE(std::abs(b.angular), 0.4);

  auto far = goal_at(0.1);
  far.obstacles.push_back({0.0, 10.0});
  EXPECT_EQ(policy_min_steering(kOrigin, far), (Behavior{0.75, 0.1}));
}

TEST(Adaptive, Examples) {
  auto e = goal_at(0.0);
  e.terrain_ruggedness = 0.0;
  EXPECT_DOUBLE_EQ(policy_adaptive(kOrigin, e).linear, 2.0);
  e.terrain_ruggedness = 1.0;
  EXPECT_NEAR(policy_adaptive(kOrigin, e).linear, 0.2 * 2.0, 1e-12);
  e.terrain_ruggedness = 0.5;
  EXPECT_NEAR(policy_adaptive(kOrigin, e).linear, 0.6 * 2.0, 1e-12);
}

TEST(NoBias, EqualInputsGiveThatPoint) {
  const std::array<Behavior, 4> same{Behavior{1, 0}, Behavior{1, 0}, Behavior{1, 0}, Behavior{1, 0}};
  const auto w = no_bias_weights(3, 7);
  const Behavior b = mix_behaviors(same, w);
  EXPECT_NEAR(b.linear, 1.0, 1e-15);
  EXPECT_EQ(b.angular, 0.0);
}

TEST(NoBias, VertexEqualsMaxSpeed) {
  const auto e = goal_at(0.4);
  const std::array<Behavior, 4> base{policy_max_speed(kOrigin, e), policy_obstacle_avoidance(kOrigin, e),
                                     policy_min_steering(kOrigin, e), policy_adaptive(kOrigin, e)};
  EXPECT_EQ(mix_behaviors(base, {1.0, 0.0, 0.0, 0.0}), policy_max_speed(kOrigin, e));
}

TEST(NoBias, Deterministic) {
  auto e = goal_at(0.3);
  e.time = 4.2;
  e.obstacles.push_back({-0.4, 1.2});
  EXPECT_EQ(policy_no_bias(kOrigin, e, 42), policy_no_bias(kOrigin, e, 42));
  const auto w = no_bias_weights(42, 2);
  double sum = 0.0;
  for (double x : w) {
    EXPECT_GE(x, 0.0);
    sum += x;
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

SensedEnvironment random_env(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SensedEnvironment e;
  e.goal_bearing = (2.0 * u(rng) - 1.0) * kPi;
  e.goal_distance = 30.0 * u(rng);
  e.terrain_ruggedness = u(rng);
  e.time = 100.0 * u(rng);
  const int n = static_cast<int>(6 * u(rng));
  for (int i = 0; i < n; ++i) e.obstacles.push_back({(2.0 * u(rng) - 1.0) * kPi, 6.0 * u(rng) * u(rng)});
  return e;
}

TEST(PolicyProperties, FuzzOutputsAdmissible) {
  std::mt19937_64 rng(2024);
  const PolicyParams p;
  for (int i = 0; i < 10000; ++i) {
    const auto e = random_env(rng);
    ASSERT_TRUE(e.valid());
    const std::uint64_t seed = rng();
    for (std::size_t k = 0; k < kPolicyKindCount; ++k) {
      const Behavior b = act(static_cast<PolicyKind>(k), kOrigin, e, seed, p);
      ASSERT_TRUE(p.limits.admits(b)) << policy_name(static_cast<PolicyKind>(k)) << " case " << i;
    }
  }
}

TEST(PolicyProperties, MinSteeringSpeedIsExact) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 10000; ++i) ASSERT_EQ(policy_min_steering(kOrigin, random_env(rng)).linear, 0.75);
}

TEST(PolicyProperties, NoBiasInsideHull) {
  std::mt19937_64 rng(78);
  for (int i = 0; i < 10000; ++i) {
    const auto e = random_env(rng);
    const std::array<Behavior, 4> base{policy_max_speed(kOrigin, e), policy_obstacle_avoidance(kOrigin, e),
                                       policy_min_steering(kOrigin, e), policy_adaptive(kOrigin, e)};
    double vlo = 1e9, vhi = -1e9, wlo = 1e9, whi = -1e9;
    for (const auto& b : base) {
      vlo = std::min(vlo, b.linear);
      vhi = std::max(vhi, b.linear);
      wlo = std::min(wlo, b.angular);
      whi = std::max(whi, b.angular);
    }
    const Behavior b = policy_no_bias(kOrigin, e, static_cast<std::uint64_t>(i));
    ASSERT_GE(b.linear, vlo - 1e-12);
    ASSERT_LE(b.linear, vhi + 1e-12);
    ASSERT_GE(b.angular, wlo - 1e-12);
    ASSERT_LE(b.angular, whi + 1e-12);
  }
}

TEST(PolicyLibrary, NamesAndLookup) {
  const auto lib = PolicyLibrary::standard();
  EXPECT_EQ(lib.size(), 5u);
  EXPECT_EQ(lib.id(1).name(), "obstacle_avoidance");
  EXPECT_EQ(lib.find(PolicyKind::kAdaptive), 3u);
  EXPECT_EQ(policy_kind_from_name("no_bias"), PolicyKind::kNoBias);
  EXPECT_THROW(policy_kind_from_name("teleport"), std::invalid_argument);
  EXPECT_THROW(PolicyLibrary({PolicyKind::kMaxSpeed, PolicyKind::kMaxSpeed}), std::invalid_argument);
  EXPECT_THROW(lib.id(5), std::out_of_range);
}

}  // namespace
}  // namespace nauts
