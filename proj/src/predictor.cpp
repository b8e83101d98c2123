#include "nauts/predictor.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "nauts/kernels.hpp"

namespace nauts {
namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2 pi)
constexpr std::size_t kBehaviorDims = 2;
constexpr double kMinFeatureScale = 0.25;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double basis_value(std::size_t b, std::size_t k, std::size_t horizon) {
  const double u = horizon > 1 ? static_cast<double>(k) / static_cast<double>(horizon - 1) - 0.5 : 0.0;
  switch (b) {
    case 0: return 1.0;
    case 1: return u;
    default: return u * u - 1.0 / 12.0;
  }
}

void check_arch(const PredictorArch& a) {
  if (a.q < 2) throw std::invalid_argument("predictor: q must be >= 2");
  if (a.horizon < 1) throw std::invalid_argument("predictor: horizon must be >= 1");
  if (a.feature_count < 1) throw std::invalid_argument("predictor: feature_count must be >= 1");
  if (a.basis_count < 1 || a.basis_count > 3) throw std::invalid_argument("predictor: basis_count in [1, 3]");
  if (!(a.lengthscale > 0.0) || !(a.dt > 0.0)) throw std::invalid_argument("predictor: lengthscale, dt > 0");
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Normalized feature rows (and their squares) for a fixed set of inputs. The
// weight-dependent part of the loss only needs two small matrix products
// against these.
struct FeatureBatch {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> phi;
  std::vector<double> phi_sq;
};

FeatureBatch build_features(const PredictorParams& p, const TrainingSamples& batch) {
  FeatureBatch fb;
  fb.rows = batch.size();
  fb.cols = p.arch.total_features();
  fb.phi.resize(fb.rows * fb.cols);
  for (std::size_t r = 0; r < fb.rows; ++r) {
    const auto raw = raw_features(p, batch[r].observation, batch[r].goal);
    for (std::size_t f = 0; f < fb.cols; ++f) {
      fb.phi[r * fb.cols + f] = (raw[f] - p.feature_shift[f]) / p.feature_scale[f];
    }
  }
  fb.phi_sq.resize(fb.phi.size());
  kernels::square(fb.phi, fb.phi_sq);
  return fb;
}

// Per-row temporal coefficients: mean[b][d] and variance weight[b][d].
struct Coefficients {
  std::size_t width = 0;
  std::vector<double> mean;
  std::vector<double> var;
};

Coefficients coefficients(const FeatureBatch& fb, std::span<const double> means,
                          std::span<const double> log_vars) {
  Coefficients c;
  c.width = means.size() / fb.cols;
  c.mean.resize(fb.rows * c.width);
  c.var.resize(fb.rows * c.width);
  std::vector<double> w_var(log_vars.size());
  std::transform(log_vars.begin(), log_vars.end(), w_var.begin(), [](double l) { return std::exp(l); });
  kernels::matmul(fb.phi.data(), means.data(), c.mean.data(), fb.rows, fb.cols, c.width);
  kernels::matmul(fb.phi_sq.data(), w_var.data(), c.var.data(), fb.rows, fb.cols, c.width);
  return c;
}

PolicyPrediction expand(const PredictorArch& arch, const double* mean, const double* var, bool* clamped) {
  PolicyPrediction pred;
  const std::size_t T = arch.horizon;
  pred.behaviors.resize(T);
  pred.behavior_variances.resize(T);
  for (std::size_t k = 0; k < T; ++k) {
    double m[kBehaviorDims] = {0.0, 0.0};
    double v[kBehaviorDims] = {0.0, 0.0};
    for (std::size_t b = 0; b < arch.basis_count; ++b) {
      const double phi = basis_value(b, k, T);
      for (std::size_t d = 0; d < kBehaviorDims; ++d) {
        m[d] += phi * mean[b * kBehaviorDims + d];
        v[d] += phi * phi * var[b * kBehaviorDims + d];
      }
    }
    for (double& x : v) {
      if (!(x >= kVarianceFloor)) {
        x = kVarianceFloor;
        if (clamped) *clamped = true;
      }
    }
    pred.behaviors[k] = Behavior{m[0], m[1]};
    pred.behavior_variances[k] = Behavior{v[0], v[1]};
  }
  pred.states = integrate(RobotState{}, pred.behaviors, arch.dt).states;
  return pred;
}

LossBreakdown batch_loss(const PredictorArch& arch, const FeatureBatch& fb, const TrainingSamples& batch,
                         std::span<const double> means, std::span<const double> log_vars, double lambda1,
                         double lambda2) {
  const Coefficients c = coefficients(fb, means, log_vars);
  LossBreakdown out;
  double nll = 0.0;
  double goal = 0.0;
  for (std::size_t r = 0; r < fb.rows; ++r) {
    bool clamped = false;
    const auto pred = expand(arch, c.mean.data() + r * c.width, c.var.data() + r * c.width, &clamped);
    const SampleTerms t = sample_terms(pred, batch[r]);
    nll += t.nll;
    goal += t.goal_error;
    out.variance_clamped = out.variance_clamped || clamped || t.variance_clamped;
  }
  const double n = static_cast<double>(fb.rows);
  out.likelihood_term = lambda1 * nll / n;
  out.goal_term = lambda2 * goal / n;
  out.total = out.likelihood_term + out.goal_term;
  return out;
}

std::vector<double> gaussian_direction(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> u(dim);
  for (double& x : u) x = normal(rng);
  return u;
}

double checked_eval(const Objective& f, std::span<const double> x) {
  const double v = f(x);
  if (!std::isfinite(v)) {
    throw ObjectiveError("zeroth-order objective returned a non-finite value",
                         std::vector<double>(x.begin(), x.end()));
  }
  return v;
}

std::vector<double> zo_estimate_at(const Objective& objective, std::span<const double> x, double fx, double mu,
                                   std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> grad(x.size(), 0.0);
  std::vector<double> probe(x.size());
  for (std::size_t j = 0; j < samples; ++j) {
    const auto u = gaussian_direction(rng, x.size());
    std::copy(x.begin(), x.end(), probe.begin());
    kernels::axpy(mu, u, probe);
    const double fp = checked_eval(objective, probe);
    kernels::axpy((fp - fx) / mu, u, grad);
  }
  for (double& g : grad) g /= static_cast<double>(samples);
  return grad;
}


FeatureBatch select_rows(const FeatureBatch& fb, const std::vector<std::size_t>& rows) {
  FeatureBatch out;
  out.rows = rows.size();
  out.cols = fb.cols;
  out.phi.resize(out.rows * out.cols);
  out.phi_sq.resize(out.rows * out.cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = static_cast<std::ptrdiff_t>(rows[r] * fb.cols);
    const auto dst = static_cast<std::ptrdiff_t>(r * fb.cols);
    const auto n = static_cast<std::ptrdiff_t>(fb.cols);
    std::copy(fb.phi.begin() + src, fb.phi.begin() + src + n, out.phi.begin() + dst);
    std::copy(fb.phi_sq.begin() + src, fb.phi_sq.begin() + src + n, out.phi_sq.begin() + dst);
  }
  return out;
}

// Stochastic zeroth-order descent: each iteration draws a minibatch and
// estimates the gradient of the minibatch loss. The full-set loss is recorded
// every curve_every iterations and after the last one; the best recorded
// iterate is returned.
std::vector<double> minibatch_descent(const PredictorArch& arch, const FeatureBatch& fb, const TrainingSamples& samples,
                                      std::vector<double> x, double initial, const TrainConfig& config,
                                      TrainResult& out) {
  const ZoConfig& zo = config.zo;
  if (!(zo.step_size > 0.0)) throw std::invalid_argument("train: step size must be > 0");
  const std::size_t W = arch.weight_count();
  const auto split = [W](std::span<const double> z) { return std::pair{z.subspan(0, W), z.subspan(W, W)}; };
  std::mt19937_64 rng(mix_seed(zo.seed, 0x6d696e69ULL));
  std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
  std::vector<std::size_t> rows(config.batch_size);
  TrainingSamples batch(config.batch_size);
  std::vector<double> best = x;
  double best_value = initial;
  const std::size_t every = std::max<std::size_t>(config.curve_every, 1);
  for (std::size_t t = 0; t < zo.iterations; ++t) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      rows[r] = pick(rng);
      batch[r] = samples[rows[r]];
    }
    const FeatureBatch sub = select_rows(fb, rows);
    const auto f = [&](std::span<const double> z) {
      const auto [m, lv] = split(z);
      return batch_loss(arch, sub, batch, m, lv, config.lambda1, config.lambda2).total;
    };
    const auto g = zo_gradient_estimate(f, x, zo.mu, zo.directions, mix_seed(zo.seed, t));
    const double eta = zo.step_size / std::sqrt(1.0 + static_cast<double>(t) / zo.decay_offset);
    kernels::axpy(-eta, g, x);
    if ((t + 1) % every != 0 && t + 1 != zo.iterations) continue;
    const auto [m, lv] = split(x);
    const LossBreakdown full = batch_loss(arch, fb, samples, m, lv, config.lambda1, config.lambda2);
    if (!std::isfinite(full.total) || full.total > zo.divergence_threshold) {
      throw NumericError("zeroth-order training diverged at iteration " + std::to_string(t + 1) + ": loss " +
                         std::to_string(full.total));
    }
    out.loss_curve.push_back(full);
    out.curve_iterations.push_back(t + 1);
    if (full.total < best_value) {
      best_value = full.total;
      best = x;
    }
  }
  return best;
}

}  // namespace

// ---------------------------------------------------------------------------

PredictorParams PredictorParams::initialize(const PredictorArch& arch) {
  check_arch(arch);
  PredictorParams p;
  p.arch = arch;
  std::mt19937_64 rng(mix_seed(arch.seed, 0));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  p.frequencies.resize(arch.input_dim() * arch.feature_count);
  for (double& w : p.frequencies) w = normal(rng) / arch.lengthscale;
  p.phases.resize(arch.feature_count);
  for (double& b : p.phases) b = phase(rng);
  p.feature_shift.assign(arch.total_features(), 0.0);
  p.feature_scale.assign(arch.total_features(), 1.0);
  p.weight_means.assign(arch.weight_count(), 0.0);
  p.weight_log_variances.assign(arch.weight_count(),
                                std::log(arch.initial_weight_variance / static_cast<double>(arch.total_features())));
  return p;
}

void PredictorParams::validate() const {
  check_arch(arch);
  if (frequencies.size() != arch.input_dim() * arch.feature_count || phases.size() != arch.feature_count ||
      feature_shift.size() != arch.total_features() || feature_scale.size() != arch.total_features() ||
      weight_means.size() != arch.weight_count() || weight_log_variances.size() != arch.weight_count()) {
    throw std::invalid_argument("PredictorParams: array sizes do not match the architecture");
  }
  if (!all_finite(frequencies) || !all_finite(phases) || !all_finite(feature_shift) ||
      !all_finite(feature_scale) || !all_finite(weight_means) || !all_finite(weight_log_variances)) {
    throw std::invalid_argument("PredictorParams: non-finite entries");
  }
  for (double s : feature_scale) {
    if (!(s > 0.0)) throw std::invalid_argument("PredictorParams: feature scales must be positive");
  }
}

bool PolicyPrediction::consistent() const noexcept {
  if (states.size() != behaviors.size() + 1 || behavior_variances.size() != behaviors.size()) return false;
  for (const auto& v : behavior_variances) {
    if (!(v.linear > 0.0) || !(v.angular > 0.0)) return false;
  }
  return trajectory().consistent();
}

void TrainingSample::validate(std::size_t horizon) const {
  if (actual_behaviors.size() != horizon || actual_states.size() != horizon + 1) {
    throw std::invalid_argument("TrainingSample: expected " + std::to_string(horizon) + " behaviors and " +
                                std::to_string(horizon + 1) + " states");
  }
  if (!goal.finite()) throw std::invalid_argument("TrainingSample: non-finite goal");
}

std::vector<double> raw_features(const PredictorParams& params, const ObservationVector& o, const Goal& g) {
  const PredictorArch& a = params.arch;
  if (o.dim() != a.q) {
    throw std::invalid_argument("predict: observation has dimension " + std::to_string(o.dim()) + ", model expects " +
                                std::to_string(a.q));
  }
  if (!g.finite()) throw std::invalid_argument("predict: non-finite goal");
  const auto feats = o.features();
  for (double f : feats) {
    if (!std::isfinite(f)) throw std::invalid_argument("predict: non-finite observation feature");
  }
  const double beta = g.norm() > 0.0 ? g.bearing() : 0.0;

  std::vector<double> z;
  z.reserve(a.input_dim());
  z.insert(z.end(), feats.begin() + 1, feats.end());
  z.push_back(std::cos(beta));
  z.push_back(std::sin(beta));
  z.push_back(beta / kPi);

  std::vector<double> phi;
  phi.reserve(a.total_features());
  phi.push_back(feats[0]);
  phi.insert(phi.end(), z.begin(), z.end());
  std::vector<double> proj(a.feature_count, 0.0);
  kernels::matmul(z.data(), params.frequencies.data(), proj.data(), 1, z.size(), a.feature_count);
  const double amp = std::sqrt(2.0 / static_cast<double>(a.feature_count));
  for (std::size_t j = 0; j < a.feature_count; ++j) phi.push_back(amp * std::cos(proj[j] + params.phases[j]));
  return phi;
}

PolicyPrediction predict(const PredictorParams& params, const ObservationVector& o, const Goal& g) {
  FeatureBatch fb;
  fb.rows = 1;
  fb.cols = params.arch.total_features();
  const auto raw = raw_features(params, o, g);
  fb.phi.resize(fb.cols);
  for (std::size_t f = 0; f < fb.cols; ++f) fb.phi[f] = (raw[f] - params.feature_shift[f]) / params.feature_scale[f];
  fb.phi_sq.resize(fb.cols);
  kernels::square(fb.phi, fb.phi_sq);
  const Coefficients c = coefficients(fb, params.weight_means, params.weight_log_variances);
  return expand(params.arch, c.mean.data(), c.var.data(), nullptr);
}

SampleTerms sample_terms(const PolicyPrediction& prediction, const TrainingSample& sample) {
  const std::size_t T = prediction.behaviors.size();
  sample.validate(T);
  SampleTerms t;
  for (std::size_t k = 0; k < T; ++k) {
    const Behavior& m = prediction.behaviors[k];
    const Behavior& a = sample.actual_behaviors[k];
    double vl = prediction.behavior_variances[k].linear;
    double va = prediction.behavior_variances[k].angular;
    if (!(vl >= kVarianceFloor)) {
      vl = kVarianceFloor;
      t.variance_clamped = true;
    }
    if (!(va >= kVarianceFloor)) {
      va = kVarianceFloor;
      t.variance_clamped = true;
    }
    const double el = a.linear - m.linear;
    const double ea = a.angular - m.angular;
    t.nll += 0.5 * (kLog2Pi + std::log(vl)) + el * el / (2.0 * vl);
    t.nll += 0.5 * (kLog2Pi + std::log(va)) + ea * ea / (2.0 * va);
  }
  for (std::size_t k = 0; k <= T; ++k) {
    const RobotState& s = prediction.states[k];
    const RobotState& a = sample.actual_states[k];
    const double ex = a.x - s.x;
    const double ey = a.y - s.y;
    const double eh = normalize_angle(a.heading - s.heading);
    t.nll += 1.5 * kLog2Pi + 0.5 * (ex * ex + ey * ey + eh * eh);
  }
  const double gx = sample.goal.dx - (prediction.states[T].x - prediction.states[0].x);
  const double gy = sample.goal.dy - (prediction.states[T].y - prediction.states[0].y);
  t.goal_error = gx * gx + gy * gy;
  return t;
}

LossBreakdown loss_eq1(const PredictorParams& params, const TrainingSamples& batch, double lambda1,
                       double lambda2) {
  if (batch.empty()) throw std::invalid_argument("loss_eq1: empty batch");
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw std::invalid_argument("loss_eq1: negative weights");
  params.validate();
  for (const auto& s : batch) s.validate(params.arch.horizon);
  const FeatureBatch fb = build_features(params, batch);
  return batch_loss(params.arch, fb, batch, params.weight_means, params.weight_log_variances, lambda1, lambda2);
}

std::vector<double> zo_gradient_estimate(const Objective& objective, std::span<const double> x, double mu,
                                         std::size_t samples, std::uint64_t seed) {
  if (!(mu > 0.0)) throw std::invalid_argument("zo_gradient_estimate: mu must be > 0");
  if (samples < 1) throw std::invalid_argument("zo_gradient_estimate: need at least one sample");
  const double fx = checked_eval(objective, x);
  return zo_estimate_at(objective, x, fx, mu, samples, seed);
}

ZoResult zo_minimize(const Objective& objective, std::vector<double> x0, const ZoConfig& config,
                     const IterateCallback& on_iterate) {
  if (!(config.step_size > 0.0)) throw std::invalid_argument("zo_minimize: step size must be > 0");
  ZoResult r;
  std::vector<double> x = std::move(x0);
  double fx = checked_eval(objective, x);
  r.initial_value = fx;
  r.best_value = fx;
  r.best_x = x;
  r.trace.push_back(fx);
  r.evaluations = 1;
  for (std::size_t t = 0; t < config.iterations; ++t) {
    const auto g = zo_estimate_at(objective, x, fx, config.mu, config.directions, mix_seed(config.seed, t));
    const double eta = config.step_size / std::sqrt(1.0 + static_cast<double>(t) / config.decay_offset);
    kernels::axpy(-eta, g, x);
    fx = checked_eval(objective, x);
    r.evaluations += config.directions + 1;
    r.trace.push_back(fx);
    if (on_iterate) on_iterate(t + 1, x, fx);
    if (fx > config.divergence_threshold) {
      throw NumericError("zeroth-order descent diverged at iteration " + std::to_string(t + 1) +
                         ": objective " + std::to_string(fx));
    }
    if (fx < r.best_value) {
      r.best_value = fx;
      r.best_x = x;
    }
  }
  return r;
}

TrainResult train(const TrainingSamples& samples, const PredictorArch& arch, const TrainConfig& config) {
  if (samples.size() < config.min_samples) {
    throw std::invalid_argument("train: need at least " + std::to_string(config.min_samples) + " samples, got " +
                                std::to_string(samples.size()));
  }
  for (const auto& s : samples) s.validate(arch.horizon);

  PredictorParams params = PredictorParams::initialize(arch);

  // Feature normalization from the training inputs; the bias stays 1.
  const std::size_t F = arch.total_features();
  std::vector<double> sum(F, 0.0), sum_sq(F, 0.0);
  for (const auto& s : samples) {
    const auto raw = raw_features(params, s.observation, s.goal);
    for (std::size_t f = 0; f < F; ++f) {
      sum[f] += raw[f];
      sum_sq[f] += raw[f] * raw[f];
    }
  }
  const double n = static_cast<double>(samples.size());
  for (std::size_t f = 1; f < F; ++f) {
    const double mean = sum[f] / n;
    const double var = std::max(0.0, sum_sq[f] / n - mean * mean);
    params.feature_shift[f] = mean;
    // Floored so rarely active inputs do not blow up far from the data.
    params.feature_scale[f] = std::max(std::sqrt(var), kMinFeatureScale);
  }

  const FeatureBatch fb = build_features(params, samples);
  const std::size_t W = arch.weight_count();
  auto eval = [&](std::span<const double> x) {
    return batch_loss(arch, fb, samples, x.subspan(0, W), x.subspan(W, W), config.lambda1, config.lambda2);
  };

  std::vector<double> x0(params.weight_means);
  x0.insert(x0.end(), params.weight_log_variances.begin(), params.weight_log_variances.end());

  TrainResult out;
  out.initial = eval(x0);
  out.loss_curve.push_back(out.initial);
  out.curve_iterations.push_back(0);
  std::vector<double> best;
  if (config.batch_size == 0 || config.batch_size >= samples.size()) {
    LossBreakdown last;
    const ZoResult zo = zo_minimize(
        [&](std::span<const double> x) {
          last = eval(x);
          return last.total;
        },
        x0, config.zo,
        // zo_minimize evaluates the new iterate last, so `last` belongs to it.
        [&](std::size_t t, std::span<const double>, double) {
          out.loss_curve.push_back(last);
          out.curve_iterations.push_back(t);
        });
    best = zo.best_x;
  } else {
    best = minibatch_descent(arch, fb, samples, x0, out.initial.total, config, out);
  }
  std::copy(best.begin(), best.begin() + static_cast<std::ptrdiff_t>(W), params.weight_means.begin());
  std::copy(best.begin() + static_cast<std::ptrdiff_t>(W), best.end(), params.weight_log_variances.begin());
  out.final = eval(best);
  out.params = std::move(params);
  return out;
}

std::vector<TrainResult> train_all(const std::vector<TrainingSamples>& per_policy, const PredictorArch& arch,
                                   const TrainConfig& config, bool parallel) {
  std::vector<TrainResult> out;
  out.reserve(per_policy.size());
  if (!parallel || per_policy.size() < 2) {
    for (const auto& s : per_policy) out.push_back(train(s, arch, config));
    return out;
  }
  std::vector<std::future<TrainResult>> jobs;
  jobs.reserve(per_policy.size());
  for (const auto& s : per_policy) {
    jobs.push_back(std::async(std::launch::async, [&s, &arch, &config] { return train(s, arch, config); }));
  }
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

void save_model(const std::filesystem::path& path, const PredictorParams& params, const std::string& policy) {
  params.validate();
  const PredictorArch& a = params.arch;
  nlohmann::json j;
  j["format"] = "nauts-predictor";
  j["version"] = kModelFormatVersion;
  j["policy"] = policy;
  j["q"] = a.q;
  j["horizon"] = a.horizon;
  j["feature_count"] = a.feature_count;
  j["basis_count"] = a.basis_count;
  j["lengthscale"] = a.lengthscale;
  j["dt"] = a.dt;
  j["initial_weight_variance"] = a.initial_weight_variance;
  j["seed"] = a.seed;
  j["frequencies"] = params.frequencies;
  j["phases"] = params.phases;
  j["feature_shift"] = params.feature_shift;
  j["feature_scale"] = params.feature_scale;
  j["weight_means"] = params.weight_means;
  j["weight_log_variances"] = params.weight_log_variances;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw std::runtime_error("failed writing model file " + path.string());
}

PredictorParams load_model(const std::filesystem::path& path, std::string* policy) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("model file " + path.string() + ": " + e.what());
  }
  if (j.value("format", std::string{}) != "nauts-predictor") {
    throw std::runtime_error("model file " + path.string() + ": not a predictor model");
  }
  const int version = j.value("version", -1);
  if (version != kModelFormatVersion) {
    throw std::runtime_error("model file " + path.string() + ": unsupported version " + std::to_string(version));
  }
  PredictorParams p;
  try {
    p.arch.q = j.at("q").get<std::size_t>();
    p.arch.horizon = j.at("horizon").get<std::size_t>();
    p.arch.feature_count = j.at("feature_count").get<std::size_t>();
    p.arch.basis_count = j.at("basis_count").get<std::size_t>();
    p.arch.lengthscale = j.at("lengthscale").get<double>();
    p.arch.dt = j.at("dt").get<double>();
    p.arch.initial_weight_variance = j.at("initial_weight_variance").get<double>();
    p.arch.seed = j.at("seed").get<std::uint64_t>();
    p.frequencies = j.at("frequencies").get<std::vector<double>>();
    p.phases = j.at("phases").get<std::vector<double>>();
    p.feature_shift = j.at("feature_shift").get<std::vector<double>>();
    p.feature_scale = j.at("feature_scale").get<std::vector<double>>();
    p.weight_means = j.at("weight_means").get<std::vector<double>>();
    p.weight_log_variances = j.at("weight_log_variances").get<std::vector<double>>();
    if (policy) *policy = j.value("policy", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("model file " + path.string() + ": " + e.what());
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error("model file " + path.string() + ": " + e.what());
  }
  return p;
}

}  // namespace nauts
