#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "nauts/predictor.hpp"
#include "support.hpp"

namespace nauts {
namespace {

using testing::kinematically_exact;
using testing::random_observation;

constexpr double kLog2Pi = 1.8378770664093453;

TEST(Predict, ZeroModel) {
  const auto params = PredictorParams::initialize(PredictorArch{});
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const auto p = predict(params, random_observation(8, rng), Goal{3.0 * i - 20.0, 1.0});
    ASSERT_EQ(p.behaviors.size(), 9u);
    for (const auto& b : p.behaviors) EXPECT_EQ(b, (Behavior{0.0, 0.0}));
    for (const auto& s : p.states) EXPECT_EQ(s, RobotState{});
  }
}

PredictorParams random_params(std::uint64_t seed) {
  auto params = PredictorParams::initialize(PredictorArch{});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.3);
  for (double& w : params.weight_means) w = g(rng);
  return params;
}

TEST(Predict, DeterministicAndKinematicallyConsistent) {
  const auto params = random_params(3);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const auto o = random_observation(8, rng);
    const Goal g{u(rng), u(rng)};
    const auto a = predict(params, o, g);
    const auto b = predict(params, o, g);
    ASSERT_EQ(a.behaviors, b.behaviors);
    ASSERT_EQ(a.states, b.states);
    ASSERT_EQ(a.behavior_variances, b.behavior_variances);
    ASSERT_TRUE(kinematically_exact(a));
    ASSERT_TRUE(a.consistent());
  }
}

TEST(Predict, RejectsBadInputs) {
  const auto params = PredictorParams::initialize(PredictorArch{});
  EXPECT_THROW(predict(params, ObservationVector::bias_only(5), Goal{1, 0}), std::invalid_argument);
  EXPECT_THROW(predict(params, ObservationVector::bias_only(8), Goal{std::nan(""), 0}), std::invalid_argument);
}

TrainingSample sample_from(const PolicyPrediction& p, const Goal& g) {
  return TrainingSample{ObservationVector::bias_only(8), g, p.behaviors, p.states};
}

PolicyPrediction exact_prediction(double variance) {
  std::vector<Behavior> a{{1, 0.1}, {1, 0.2}, {0.5, 0}, {1, -0.3}};
  PolicyPrediction p;
  p.behaviors = a;
  p.states = integrate(RobotState{}, a, 0.1).states;
  p.behavior_variances.assign(a.size(), Behavior{variance, variance});
  return p;
}

TEST(Loss, ExactPredictionGivesGaussianConstant) {
  const auto p = exact_prediction(1.0);
  const std::size_t T = p.behaviors.size();
  const Goal reached = relative_displacement(p.states.front(), p.states.back());
  const auto t = sample_terms(p, sample_from(p, reached));
  // Two behavior dimensions per step and three state dimensions per state, all unit variance.
  EXPECT_NEAR(t.nll, (2.0 * T + 3.0 * (T + 1)) * 0.5 * kLog2Pi, 1e-12);
  EXPECT_EQ(t.goal_error, 0.0);
  EXPECT_FALSE(t.variance_clamped);

  const Goal off{reached.dx + 0.3, reached.dy - 0.4};
  EXPECT_NEAR(sample_terms(p, sample_from(p, off)).goal_error, 0.25, 1e-12);
}

TEST(Loss, NllMatchesClosedForm) {
  auto p = exact_prediction(0.25);
  auto s = sample_from(p, Goal{1, 0});
  s.actual_behaviors[1].linear += 0.5;
  const std::size_t T = p.behaviors.size();
  const double behavior_part = 2.0 * T * 0.5 * (kLog2Pi + std::log(0.25)) + 0.25 / (2.0 * 0.25);
  const double state_part = 3.0 * (T + 1) * 0.5 * kLog2Pi;
  EXPECT_NEAR(sample_terms(p, s).nll, behavior_part + state_part, 1e-12);
}

TEST(Loss, LinearInLambda2) {
  const auto params = random_params(8);
  const auto batch = testing::linear_policy_samples(50, 2);
  const auto a = loss_eq1(params, batch, 0.1, 10.0);
  const auto b = loss_eq1(params, batch, 0.1, 20.0);
  EXPECT_NEAR(b.goal_term, 2.0 * a.goal_term, 1e-12 * a.goal_term);
  EXPECT_NEAR(b.likelihood_term, a.likelihood_term, 1e-12);
  EXPECT_NEAR(a.total, a.likelihood_term + a.goal_term, 1e-9);
  EXPECT_EQ(loss_eq1(params, batch, 0.1, 0.0).goal_term, 0.0);
}

TEST(ZoEstimate, ConstantGivesZero) {
  const Objective f = [](std::span<const double>) { return 4.2; };
  const std::vector<double> x{1.0, -2.0, 0.5};
  for (double g : zo_gradient_estimate(f, x, 1e-3, 1000, 1)) EXPECT_EQ(g, 0.0);
}

TEST(ZoEstimate, QuadraticGradient) {
  const Objective f = [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; };
  const auto g = zo_gradient_estimate(f, std::vector<double>{1.0, 0.0}, 1e-3, 100000, 7);
  EXPECT_NEAR(g[0], 2.0, 0.05);
  EXPECT_NEAR(g[1], 0.0, 0.05);
}

TEST(ZoEstimate, LinearGradient) {
  const std::vector<double> a{1.0, -2.0, 0.5};
  const Objective f = [&](std::span<const double> x) { return a[0] * x[0] + a[1] * x[1] + a[2] * x[2]; };
  const auto g = zo_gradient_estimate(f, std::vector<double>{0.3, 0.1, -0.7}, 1e-3, 100000, 9);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(g[i], a[i], 0.05);
}

TEST(ZoEstimate, UnbiasedWithinThreeStandardErrors) {
  // Quadratic with a known gradient; single-direction estimates are i.i.d.
  const std::vector<double> c{0.5, -1.0, 2.0};
  const Objective f = [&](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (i + 1.0) * (x[i] - c[i]) * (x[i] - c[i]);
    return s;
  };
  const std::vector<double> x{0.1, 0.2, 0.3};
  const std::size_t n = 100000;
  std::vector<double> sum(3, 0.0), sum_sq(3, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto g = zo_gradient_estimate(f, x, 1e-4, 1, 1000 + j);
    for (std::size_t i = 0; i < 3; ++i) {
      sum[i] += g[i];
      sum_sq[i] += g[i] * g[i];
    }
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const double mean = sum[i] / n;
    const double se = std::sqrt((sum_sq[i] / n - mean * mean) / n);
    const double truth = 2.0 * (i + 1.0) * (x[i] - c[i]);
    EXPECT_LE(std::abs(mean - truth), 3.0 * se) << i;
  }
}

TEST(ZoMinimize, ReportsNonFiniteObjective) {
  const Objective f = [](std::span<const double> x) { return x[0] > 0.5 ? std::nan("") : x[0]; };
  EXPECT_THROW(zo_minimize(f, {1.0}, ZoConfig{}), ObjectiveError);
}

TEST(Train, ZeroBudgetKeepsInitialization) {
  const auto samples = testing::linear_policy_samples(200, 3);
  TrainConfig cfg;
  cfg.zo.iterations = 0;
  const auto r = train(samples, PredictorArch{}, cfg);
  const auto init = PredictorParams::initialize(PredictorArch{});
  EXPECT_EQ(r.params.weight_means, init.weight_means);
  EXPECT_EQ(r.params.weight_log_variances, init.weight_log_variances);
  EXPECT_EQ(r.params.frequencies, init.frequencies);
  EXPECT_EQ(r.final.total, r.initial.total);
}

TEST(Train, FinalNotAboveInitial) {
  const auto samples = testing::linear_policy_samples(300, 4);
  for (std::size_t batch : {0u, 32u}) {
    TrainConfig cfg;
    cfg.zo.iterations = 300;
    cfg.batch_size = batch;
    const auto r = train(samples, PredictorArch{}, cfg);
    EXPECT_LE(r.final.total, r.initial.total);
    EXPECT_LT(r.final.total, r.initial.total);
    ASSERT_EQ(r.loss_curve.size(), r.curve_iterations.size());
    EXPECT_EQ(r.curve_iterations.front(), 0u);
    EXPECT_EQ(r.curve_iterations.back(), 300u);
  }
}

TEST(Train, RejectsTooFewSamples) {
  EXPECT_THROW(train(testing::linear_policy_samples(10, 1), PredictorArch{}, TrainConfig{}), std::invalid_argument);
}

TEST(Train, MaxSpeedStraightLine) {
  // Straight-line runs at v_max with the goal ahead.
  const double v_max = 2.0;
  const auto samples = testing::linear_policy_samples(400, 5, v_max, 0.0);
  TrainConfig cfg;
  cfg.zo.iterations = 4000;
  const auto r = train(samples, PredictorArch{}, cfg);
  std::mt19937_64 rng(6);
  const Goal ahead = samples.front().goal;
  for (int i = 0; i < 20; ++i) {
    const auto p = predict(r.params, random_observation(8, rng), ahead);
    EXPECT_NEAR(p.behaviors[0].linear, v_max, 0.1 * v_max);
  }
}

TEST(ModelFile, RoundTripAndVersion) {
  const auto dir = std::filesystem::temp_directory_path() / "nauts_model_test";
  std::filesystem::create_directories(dir);
  const auto params = random_params(12);
  save_model(dir / "m.json", params, "adaptive");
  std::string policy;
  const auto back = load_model(dir / "m.json", &policy);
  EXPECT_EQ(policy, "adaptive");
  EXPECT_EQ(back, params);

  std::ifstream in(dir / "m.json");
  auto j = nlohmann::json::parse(in);
  j["version"] = kModelFormatVersion + 1;
  std::ofstream(dir / "future.json") << j.dump();
  EXPECT_THROW(load_model(dir / "future.json"), std::runtime_error);
  EXPECT_THROW(load_model(dir / "missing.json"), std::runtime_error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace nauts
