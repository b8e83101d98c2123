#pragma once

// Per-policy behavior prediction models.
//
// Each model maps (observation, goal) to T future behaviors through a
// random-Fourier-feature linear regressor whose weights are independent
// Gaussians (mean, log-variance). Predicted states are never regressed
// directly; they come from integrating the predicted behaviors through the
// unicycle model from the origin of the planning frame, so every prediction is
// kinematically consistent by construction.
//
// Training minimizes a Gaussian negative log-likelihood of the demonstrated
// behaviors and states plus a squared goal-reaching error, using a two-point
// Gaussian-smoothing zeroth-order gradient estimator.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nauts/core.hpp"
#include "nauts/kinematics.hpp"

namespace nauts {

/// Shape of a predictor; everything here is fixed before training starts.
struct PredictorArch {
  std::size_t q = 8;              // observation dimension
  std::size_t horizon = 9;        // T
  std::size_t feature_count = 16; // random Fourier features
  std::size_t basis_count = 2;    // temporal basis: constant, ramp, centered square
  double lengthscale = 1.0;
  double dt = 0.1;
  double initial_weight_variance = 0.05;  // spread over all features at init
  std::uint64_t seed = 7;                 // draws the random frequencies

  std::size_t input_dim() const noexcept { return q - 1 + 3; }
  std::size_t total_features() const noexcept { return q + 3 + feature_count; }
  /// Number of mean (or log-variance) entries.
  std::size_t weight_count() const noexcept { return total_features() * basis_count * 2; }

  friend bool operator==(const PredictorArch&, const PredictorArch&) = default;
};

struct PredictorParams {
  PredictorArch arch;
  std::vector<double> frequencies;    // input_dim x feature_count, row-major
  std::vector<double> phases;         // feature_count
  std::vector<double> feature_shift;  // total_features
  std::vector<double> feature_scale;  // total_features
  std::vector<double> weight_means;         // total_features x basis x 2
  std::vector<double> weight_log_variances; // same layout

  /// Zero means, uniform prior variance, identity feature normalization.
  static PredictorParams initialize(const PredictorArch& arch);

  std::size_t feature_count() const noexcept { return arch.feature_count; }
  std::size_t horizon() const noexcept { return arch.horizon; }
  /// Throws std::invalid_argument when sizes disagree with `arch` or values are non-finite.
  void validate() const;

  friend bool operator==(const PredictorParams&, const PredictorParams&) = default;
};

struct PolicyPrediction {
  std::vector<Behavior> behaviors;          // T
  std::vector<RobotState> states;           // T+1, states[0] is the planning pose
  std::vector<Behavior> behavior_variances; // T, per-dimension variance

  Trajectory trajectory() const { return Trajectory{states, behaviors}; }
  bool consistent() const noexcept;
};

/// One sliding-window sample. States are expressed in the body frame of the
/// first state, which is therefore the origin with zero heading.
struct TrainingSample {
  ObservationVector observation;
  Goal goal;
  std::vector<Behavior> actual_behaviors;  // T
  std::vector<RobotState> actual_states;   // T+1

  void validate(std::size_t horizon) const;
};

using TrainingSamples = std::vector<TrainingSample>;

/// Model input features for (o, g) before normalization.
std::vector<double> raw_features(const PredictorParams& params, const ObservationVector& o, const Goal& g);

/// Mean prediction. Throws std::invalid_argument on dimension mismatch or
/// non-finite goal.
PolicyPrediction predict(const PredictorParams& params, const ObservationVector& o, const Goal& g);

inline constexpr double kVarianceFloor = 1e-6;

struct LossBreakdown {
  double total = 0.0;
  double likelihood_term = 0.0;  // lambda1 * mean NLL
  double goal_term = 0.0;        // lambda2 * mean goal error
  bool variance_clamped = false;
};

/// Unweighted per-sample terms: Gaussian NLL of behaviors (predicted
/// variance) and states (unit variance), and ||g - (s_T - s_0)||^2.
struct SampleTerms {
  double nll = 0.0;
  double goal_error = 0.0;
  bool variance_clamped = false;
};
SampleTerms sample_terms(const PolicyPrediction& prediction, const TrainingSample& sample);

/// lambda1 * NLL + lambda2 * goal error, averaged over the batch.
LossBreakdown loss_eq1(const PredictorParams& params, const TrainingSamples& batch, double lambda1,
                       double lambda2);

/// Raised when the objective handed to the zeroth-order estimator returns a
/// non-finite value; carries the evaluation point.
class ObjectiveError : public NumericError {
 public:
  ObjectiveError(const std::string& what, std::vector<double> point)
      : NumericError(what), point_(std::move(point)) {}
  const std::vector<double>& point() const noexcept { return point_; }

 private:
  std::vector<double> point_;
};

using Objective = std::function<double(std::span<const double>)>;

/// Two-point Gaussian-smoothing estimate averaged over `samples` directions:
///   (1/n) sum_j [(F(x + mu u_j) - F(x)) / mu] u_j,  u_j ~ N(0, I).
std::vector<double> zo_gradient_estimate(const Objective& objective, std::span<const double> x, double mu,
                                         std::size_t samples, std::uint64_t seed);

struct ZoConfig {
  double mu = 1e-2;
  double step_size = 1e-3;
  double decay_offset = 100.0;  // eta_t = step_size / sqrt(1 + t / decay_offset)
  std::size_t directions = 16;
  std::size_t iterations = 1000;
  std::uint64_t seed = 1;
  double divergence_threshold = 1e6;
};

struct ZoResult {
  std::vector<double> best_x;
  double best_value = 0.0;
  double initial_value = 0.0;
  std::vector<double> trace;  // F at each iterate
  std::size_t evaluations = 0;
};

using IterateCallback = std::function<void(std::size_t iteration, std::span<const double> x, double value)>;

/// x <- x - eta_t * g_hat. Keeps the best iterate. Throws NumericError when
/// F exceeds the divergence threshold. The objective's last call before each
/// callback is always at the reported iterate.
ZoResult zo_minimize(const Objective& objective, std::vector<double> x0, const ZoConfig& config,
                     const IterateCallback& on_iterate = {});

struct TrainConfig {
  double lambda1 = 0.1;
  double lambda2 = 10.0;
  ZoConfig zo{.step_size = 1e-2, .iterations = 20000};
  std::size_t batch_size = 64;     // resampled every iteration; 0 = full batch
  std::size_t curve_every = 100;   // full-set loss record period with minibatches
  std::size_t min_samples = 100;
};

struct TrainResult {
  PredictorParams params;
  std::vector<LossBreakdown> loss_curve;  // full training set, initial point first
  std::vector<std::size_t> curve_iterations;  // iteration of each loss_curve entry
  LossBreakdown initial;
  LossBreakdown final;
};

/// Fits one policy's predictor. The feature normalization is estimated from
/// `samples` before the weights are optimized. With a batch size below the
/// sample count every iteration estimates the gradient on a fresh minibatch
/// and the returned weights are the best recorded full-set iterate.
TrainResult train(const TrainingSamples& samples, const PredictorArch& arch, const TrainConfig& config);

/// Trains one model per policy; independent fits run concurrently when
/// `parallel` is set.
std::vector<TrainResult> train_all(const std::vector<TrainingSamples>& per_policy, const PredictorArch& arch,
                                   const TrainConfig& config, bool parallel = true);

// Model files: versioned JSON.
inline constexpr int kModelFormatVersion = 1;
void save_model(const std::filesystem::path& path, const PredictorParams& params, const std::string& policy);
/// Throws std::runtime_error on I/O failure, unknown format or version.
PredictorParams load_model(const std::filesystem::path& path, std::string* policy = nullptr);

}  // namespace nauts
