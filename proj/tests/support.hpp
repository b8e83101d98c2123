#pragma once

// Shared generators for unit and acceptance tests.

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "nauts/kinematics.hpp"
#include "nauts/negotiation.hpp"
#include "nauts/predictor.hpp"

namespace nauts::testing {

inline ObservationVector random_observation(std::size_t q, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> f(q);
  f[0] = 1.0;
  for (std::size_t k = 1; k < q; ++k) f[k] = u(rng);
  return ObservationVector(std::move(f));
}

struct Instance {
  ObservationVector o;
  RegretVector regrets;
};

/// Regrets ~ U[0, 10].
inline Instance random_instance(std::size_t n, std::size_t q, std::size_t horizon, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 10.0);
  Instance in{random_observation(q, rng), {}};
  Eigen::MatrixXd r(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(horizon + 1));
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    for (Eigen::Index k = 0; k < r.cols(); ++k) r(i, k) = u(rng);
  }
  in.regrets = RegretVector::from_rows(r);
  return in;
}

/// Windows of a synthetic policy: constant behavior (v, k * bearing) where
/// the bearing is drawn uniformly in [-pi/2, pi/2]; the goal is the achieved
/// displacement.
inline TrainingSamples linear_policy_samples(std::size_t n, std::uint64_t seed, double v = 1.0, double k = 0.5,
                                             std::size_t q = 8, std::size_t horizon = 9) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TrainingSamples out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ObservationVector o = random_observation(q, rng);
    const double bearing = (2.0 * u(rng) - 1.0) * kPi / 2.0;
    std::vector<Behavior> a(horizon, Behavior{v, k * bearing});
    const Trajectory tr = integrate(RobotState{}, a, 0.1);
    out.push_back(TrainingSample{std::move(o), relative_displacement(tr.states.front(), tr.states.back()), a,
                                 tr.states});
  }
  return out;
}

/// Mean over samples, steps and both behavior components of the squared error.
inline double behavior_mse(const PredictorParams& params, const TrainingSamples& samples) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& s : samples) {
    const PolicyPrediction p = predict(params, s.observation, s.goal);
    for (std::size_t k = 0; k < s.actual_behaviors.size(); ++k) {
      const double el = p.behaviors[k].linear - s.actual_behaviors[k].linear;
      const double ea = p.behaviors[k].angular - s.actual_behaviors[k].angular;
      sum += el * el + ea * ea;
      count += 2;
    }
  }
  return sum / static_cast<double>(count);
}

/// Predicted states are the exact unicycle integration of the predicted behaviors.
inline bool kinematically_exact(const PolicyPrediction& p, double dt = 0.1) {
  if (p.states.size() != p.behaviors.size() + 1) return false;
  if (!(p.states[0] == RobotState{})) return false;
  for (std::size_t k = 0; k < p.behaviors.size(); ++k) {
    if (!(p.states[k + 1] == step_kinematics(p.states[k], p.behaviors[k], dt))) return false;
  }
  return true;
}

}  // namespace nauts::testing
