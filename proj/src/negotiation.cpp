#include "nauts/negotiation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "nauts/kinematics.hpp"

namespace nauts {
namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(const ObservationVector& o) {
  return {o.features().data(), static_cast<Eigen::Index>(o.dim())};
}

void check_dims(const WeightMatrix& v, const ObservationVector& o, const RegretVector& regrets) {
  if (static_cast<std::size_t>(v.cols()) != o.dim()) {
    throw std::invalid_argument("weight matrix has " + std::to_string(v.cols()) + " columns, observation has " +
                                std::to_string(o.dim()) + " features");
  }
  if (static_cast<std::size_t>(v.rows()) != regrets.policies()) {
    throw std::invalid_argument("weight matrix has " + std::to_string(v.rows()) + " policies, regrets have " +
                                std::to_string(regrets.policies()));
  }
  if (regrets.pointwise_min.size() != regrets.per_policy.cols()) {
    throw std::invalid_argument("regret vector: pointwise minimum length mismatch");
  }
}

struct Sums {
  Eigen::VectorXd r2;  // sum_k (r^i_k)^2
  Eigen::VectorXd rr;  // sum_k r*_k r^i_k
};

Sums regret_sums(const RegretVector& regrets) {
  Sums s;
  s.r2 = regrets.per_policy.rowwise().squaredNorm();
  s.rr = regrets.per_policy * regrets.pointwise_min;
  return s;
}

Eigen::MatrixXd system_matrix(const Eigen::VectorXd& o, double r2, double alpha, double lambda3,
                              bool scalar_literal) {
  const auto q = o.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(q, q) * alpha;
  if (scalar_literal) {
    a.diagonal().array() += 2.0 * lambda3 * r2 * o.squaredNorm();
  } else {
    a.noalias() += (2.0 * lambda3 * r2) * (o * o.transpose());
  }
  return a;
}

Eigen::LLT<Eigen::MatrixXd> factor(const Eigen::MatrixXd& a, std::size_t policy) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  const double rcond = llt.info() == Eigen::Success ? llt.rcond() : 0.0;
  if (llt.info() != Eigen::Success || !(rcond > 1e-15)) {
    std::ostringstream msg;
    msg << "closed-form update for policy " << policy << " is singular (reciprocal condition estimate " << rcond
        << ")";
    throw NumericError(msg.str());
  }
  return llt;
}

double scale_of(const WeightMatrix& v) {
  bool zero = false;
  const double e = exploration_norm(v, &zero);
  if (zero || !std::isfinite(e)) throw NumericError("weight matrix has a zero column");
  return e;
}

// One sweep: Q from the current V, then all columns in closed form.
WeightMatrix sweep(const WeightMatrix& v, const ObservationVector& obs, const Sums& sums, const SolverConfig& cfg) {
  const auto o = as_vector(obs);
  const Eigen::Index n = v.rows();
  const double alpha = cfg.lambda4 / (2.0 * scale_of(v));
  WeightMatrix next(n, v.cols());
  if (cfg.constraint == ConstraintMode::kMultiplier) {
    std::vector<Eigen::VectorXd> x(n), y(n);
    double ox = 0.0;
    double oy = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto llt = factor(system_matrix(o, sums.r2[i], alpha, cfg.lambda3, cfg.scalar_literal),
                              static_cast<std::size_t>(i));
      x[i] = llt.solve(Eigen::VectorXd(2.0 * cfg.lambda3 * sums.rr[i] * o));
      y[i] = llt.solve(Eigen::VectorXd(o));
      ox += o.dot(x[i]);
      oy += o.dot(y[i]);
    }
    const double mu = (ox - 1.0) / oy;
    for (Eigen::Index i = 0; i < n; ++i) next.row(i) = (x[i] - mu * y[i]).transpose();
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto llt = factor(system_matrix(o, sums.r2[i], alpha, cfg.lambda3, cfg.scalar_literal),
                              static_cast<std::size_t>(i));
      next.row(i) = llt.solve(Eigen::VectorXd(2.0 * cfg.lambda3 * sums.rr[i] * o)).transpose();
    }
    next = project_to_constraint(next, obs);
  }
  return next;
}

}  // namespace

double alignment_regret(const Goal& g, const Goal& s, const RegretConfig& config) {
  const double gn = g.norm();
  if (!g.finite() || !(gn > 0.0)) throw std::invalid_argument("regret: goal must be finite and nonzero");
  if (!s.finite()) throw std::invalid_argument("regret: displacement must be finite");
  const double sn = s.norm();
  if (sn == 0.0) return config.r_max;
  const double dot = g.dx * s.dx + g.dy * s.dy;
  if (dot <= config.epsilon * gn * sn) return config.r_max;
  return std::clamp(gn * sn / dot - 1.0, 0.0, config.r_max);
}

double effort_regret(std::span<const Behavior> history, std::size_t horizon) {
  const std::size_t n = history.size();
  const std::size_t first = n > horizon + 1 ? n - horizon - 1 : 0;
  double total = 0.0;
  for (std::size_t j = first; j < n; ++j) total += static_cast<double>(n - 1 - j) * history[j].squared_norm();
  return total;
}

double regret_value(const Goal& g, const Goal& displacement, std::span<const Behavior> history, std::size_t horizon,
                    const RegretConfig& config) {
  return alignment_regret(g, displacement, config) + effort_regret(history, horizon);
}

std::vector<double> regret_sequence(const PolicyPrediction& prediction, const Goal& g, const RegretConfig& config) {
  const std::size_t t = prediction.behaviors.size();
  if (t == 0 || !prediction.consistent()) throw std::invalid_argument("regret: inconsistent prediction");
  std::vector<double> out(t + 1);
  const RobotState& origin = prediction.states.front();
  const std::span<const Behavior> behaviors(prediction.behaviors);
  for (std::size_t h = 0; h <= t; ++h) {
    const Goal disp = relative_displacement(origin, prediction.states[std::min(h + 1, t)]);
    out[h] = regret_value(g, disp, behaviors.first(std::min(h, t - 1) + 1), t, config);
  }
  return out;
}

RegretVector RegretVector::from_rows(const Eigen::MatrixXd& per_policy) {
  if (per_policy.rows() == 0 || per_policy.cols() == 0) throw std::invalid_argument("regret vector: empty");
  RegretVector r;
  r.per_policy = per_policy;
  r.pointwise_min = per_policy.colwise().minCoeff().transpose();
  return r;
}

bool RegretVector::valid() const noexcept {
  if (pointwise_min.size() != per_policy.cols()) return false;
  if (!per_policy.allFinite() || (per_policy.array() < 0.0).any()) return false;
  for (Eigen::Index i = 0; i < per_policy.rows(); ++i) {
    if ((per_policy.row(i).transpose().array() < pointwise_min.array()).any()) return false;
  }
  return true;
}

RegretVector compute_regrets(const std::vector<PolicyPrediction>& predictions, const Goal& g,
                             const RegretConfig& config) {
  if (predictions.empty()) throw std::invalid_argument("regret: no predictions");
  const std::size_t steps = predictions.front().behaviors.size() + 1;
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(predictions.size()), static_cast<Eigen::Index>(steps));
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto seq = regret_sequence(predictions[i], g, config);
    if (seq.size() != steps) throw std::invalid_argument("regret: predictions disagree on horizon");
    for (std::size_t k = 0; k < steps; ++k) rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = seq[k];
  }
  return RegretVector::from_rows(rows);
}

double exploration_norm(const WeightMatrix& v, bool* zero_column) {
  if (zero_column) *zero_column = false;
  const double f = v.norm();
  double total = 0.0;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    const double n = v.row(i).norm();
    if (n == 0.0) {
      if (zero_column) *zero_column = true;
      return std::numeric_limits<double>::infinity();
    }
    total += f / n;
  }
  return total;
}

double objective_eq3(const WeightMatrix& v, const ObservationVector& obs, const RegretVector& regrets,
                     double lambda3, double lambda4) {
  check_dims(v, obs, regrets);
  const Eigen::VectorXd w = v * as_vector(obs);
  double data = 0.0;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    data += (regrets.pointwise_min - w[i] * regrets.per_policy.row(i).transpose()).squaredNorm();
  }
  const double e = lambda4 == 0.0 ? 0.0 : exploration_norm(v);
  return lambda3 * data + lambda4 * e;
}

ColumnSystem column_system(std::size_t i, const ObservationVector& obs, const RegretVector& regrets,
                           const Eigen::MatrixXd& q_matrix, double lambda3, double lambda4, bool scalar_literal) {
  const auto o = as_vector(obs);
  const auto q = static_cast<Eigen::Index>(obs.dim());
  if (q_matrix.rows() != q || q_matrix.cols() != q) throw std::invalid_argument("Q must be q x q");
  if (i >= regrets.policies()) throw std::out_of_range("column_system: policy index out of range");
  const auto row = regrets.per_policy.row(static_cast<Eigen::Index>(i));
  const double r2 = row.squaredNorm();
  const double rr = row.dot(regrets.pointwise_min.transpose());
  ColumnSystem sys;
  sys.a = system_matrix(o, r2, 0.0, lambda3, scalar_literal) + lambda4 * q_matrix;
  sys.b = 2.0 * lambda3 * rr * o;
  return sys;
}

Eigen::VectorXd closed_form_column(std::size_t i, const ObservationVector& o, const RegretVector& regrets,
                                   const Eigen::MatrixXd& q_matrix, double lambda3, double lambda4,
                                   bool scalar_literal) {
  const auto sys = column_system(i, o, regrets, q_matrix, lambda3, lambda4, scalar_literal);
  return factor(sys.a, i).solve(sys.b);
}

Eigen::MatrixXd q_matrix_for(const WeightMatrix& v) {
  return Eigen::MatrixXd::Identity(v.cols(), v.cols()) / (2.0 * scale_of(v));
}

WeightMatrix uniform_weights(const ObservationVector& obs, std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_weights: no policies");
  const Eigen::RowVectorXd row = as_vector(obs).transpose() / (static_cast<double>(n) * obs.squared_norm());
  return row.replicate(static_cast<Eigen::Index>(n), 1);
}

WeightMatrix project_to_constraint(const WeightMatrix& v, const ObservationVector& obs) {
  const auto o = as_vector(obs);
  const double shift = (1.0 - (v * o).sum()) / (static_cast<double>(v.rows()) * o.squaredNorm());
  WeightMatrix out = v;
  out.rowwise() += shift * o.transpose();
  return out;
}

double constraint_violation(const WeightMatrix& v, const ObservationVector& o) {
  return std::abs((v * as_vector(o)).sum() - 1.0);
}

SolveResult solve_negotiation(const ObservationVector& obs, const RegretVector& regrets, const WeightMatrix& v_init,
                              const SolverConfig& cfg) {
  check_dims(v_init, obs, regrets);
  if (!(cfg.lambda3 > 0.0) || !(cfg.lambda4 > 0.0)) throw std::invalid_argument("solver: lambdas must be positive");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("solver: tol must be positive");
  if (!v_init.allFinite()) throw std::invalid_argument("solver: initial weights not finite");
  bool zero = false;
  exploration_norm(v_init, &zero);
  if (zero) throw std::invalid_argument("solver: initial weights have a zero column");

  const Sums sums = regret_sums(regrets);
  SolveResult res;
  res.v = project_to_constraint(v_init, obs);
  exploration_norm(res.v, &zero);
  if (zero) res.v = uniform_weights(obs, v_init.rows());

  auto& diag = res.diagnostics;
  double j = objective_eq3(res.v, obs, regrets, cfg.lambda3, cfg.lambda4);
  diag.objective_trace.push_back(j);
  diag.status = SolveStatus::kMaxIterations;

  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    WeightMatrix next = sweep(res.v, obs, sums, cfg);
    double jn = objective_eq3(next, obs, regrets, cfg.lambda3, cfg.lambda4);
    // Increases within the slack are rounding at a fixed point.
    if (cfg.safeguard && !(jn <= j + cfg.monotone_slack)) {
      bool accepted = false;
      for (double a = 0.5; a > 1e-10; a *= 0.5) {
        WeightMatrix trial = res.v + a * (next - res.v);
        const double jt = objective_eq3(trial, obs, regrets, cfg.lambda3, cfg.lambda4);
        ++diag.backtracks;
        if (jt < j) {
          next = std::move(trial);
          jn = jt;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        diag.iterations = it;
        diag.status = SolveStatus::kStalled;
        break;
      }
    }
    if (cfg.throw_on_increase && jn > j + cfg.monotone_slack) {
      std::ostringstream msg;
      msg << "objective increased from " << j << " to " << jn << " at iteration " << it;
      throw ConsistencyError(msg.str());
    }
    const double rel = std::abs(j - jn) / std::max(std::abs(j), std::numeric_limits<double>::min());
    res.v = std::move(next);
    j = jn;
    diag.objective_trace.push_back(j);
    diag.iterations = it;
    if (rel < cfg.tol) {
      diag.status = SolveStatus::kConverged;
      break;
    }
  }
  diag.converged = diag.status == SolveStatus::kConverged;
  diag.stationarity_residual = stationarity(res.v, obs, regrets, cfg).max_relative;
  return res;
}

StationarityReport stationarity(const WeightMatrix& v, const ObservationVector& obs, const RegretVector& regrets,
                                const SolverConfig& cfg) {
  check_dims(v, obs, regrets);
  const auto o = as_vector(obs);
  const Eigen::MatrixXd q = q_matrix_for(v);
  const auto n = static_cast<std::size_t>(v.rows());
  std::vector<Eigen::VectorXd> raw(n);
  StationarityReport rep;
  double num = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto sys = column_system(i, obs, regrets, q, cfg.lambda3, cfg.lambda4, cfg.scalar_literal);
    raw[i] = sys.a * v.row(static_cast<Eigen::Index>(i)).transpose() - sys.b;
    rep.rhs_norms.push_back(sys.b.norm());
    num += o.dot(raw[i]);
  }
  rep.multiplier = -num / (static_cast<double>(n) * o.squaredNorm());
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (raw[i] + rep.multiplier * o).norm();
    rep.residual_norms.push_back(r);
    rep.max_relative = std::max(rep.max_relative, r / (1.0 + rep.rhs_norms[i]));
  }
  return rep;
}

WeightMatrix objective_gradient(const WeightMatrix& v, const ObservationVector& obs, const RegretVector& regrets,
                                double lambda3, double lambda4) {
  check_dims(v, obs, regrets);
  const auto o = as_vector(obs);
  const Sums sums = regret_sums(regrets);
  const Eigen::VectorXd w = v * o;
  WeightMatrix g(v.rows(), v.cols());
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    g.row(i) = (2.0 * lambda3 * (w[i] * sums.r2[i] - sums.rr[i])) * o.transpose();
  }
  if (lambda4 != 0.0) {
    const double f = v.norm();
    const Eigen::VectorXd norms = v.rowwise().norm();
    const double inv_sum = norms.cwiseInverse().sum();
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      const double ni = norms[i];
      g.row(i) += lambda4 * (inv_sum / f - f / (ni * ni * ni)) * v.row(i);
    }
  }
  return g;
}

OracleResult oracle_solve(const ObservationVector& obs, const RegretVector& regrets, double lambda3, double lambda4,
                          const OracleConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(regrets.policies());
  const auto q = static_cast<Eigen::Index>(obs.dim());
  if (!(lambda3 > 0.0) || lambda4 < 0.0) throw std::invalid_argument("oracle: invalid lambdas");
  auto f = [&](const WeightMatrix& v) {
    const double val = objective_eq3(v, obs, regrets, lambda3, lambda4);
    return std::isfinite(val) ? val : std::numeric_limits<double>::infinity();
  };
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  OracleResult best;

  for (std::size_t r = 0; r < std::max<std::size_t>(cfg.restarts, 1); ++r) {
    // Rows parallel to o form an invariant set of the gradient flow, so every
    // start is perturbed off it.
    WeightMatrix x = uniform_weights(obs, static_cast<std::size_t>(n));
    WeightMatrix noise(n, q);
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < q; ++b) noise(a, b) = normal(rng);
    x = project_to_constraint(x + noise * (x.norm() + 0.5), obs);
    double fx = f(x);
    WeightMatrix y = x;
    double theta = 1.0;
    double step = 1.0;
    for (std::size_t it = 0; it < cfg.max_iters; ++it) {
      const double fy = f(y);
      const WeightMatrix gy = objective_gradient(y, obs, regrets, lambda3, lambda4);
      WeightMatrix xn;
      double fxn = std::numeric_limits<double>::infinity();
      for (;;) {
        xn = project_to_constraint(y - step * gy, obs);
        fxn = f(xn);
        const WeightMatrix d = xn - y;
        if (std::isfinite(fy) &&
            fxn <= fy + (gy.array() * d.array()).sum() + d.squaredNorm() / (2.0 * step))
          break;
        step *= 0.5;
        if (step < 1e-18) break;
      }
      if (step < 1e-18) break;
      if (fxn > fx) {
        // Function-value restart of the momentum.
        theta = 1.0;
        y = x;
        continue;
      }
      const double theta_n = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      y = xn + ((theta - 1.0) / theta_n) * (xn - x);
      const double change = std::abs(fx - fxn);
      const double moved = (xn - x).norm();
      x = std::move(xn);
      fx = fxn;
      theta = theta_n;
      step *= 1.2;
      if (change <= cfg.tol * std::max(1.0, std::abs(fx)) && moved <= 1e-10 * std::max(1.0, x.norm())) break;
    }
    best.restart_objectives.push_back(fx);
    if (fx < best.objective) {
      best.objective = fx;
      best.v = x;
    }
  }
  return best;
}

Eigen::VectorXd blend_weights(const ObservationVector& o, const WeightMatrix& v) {
  if (static_cast<std::size_t>(v.cols()) != o.dim()) throw std::invalid_argument("blend: dimension mismatch");
  return v * as_vector(o);
}

Trajectory blend_behaviors(const ObservationVector& o, const WeightMatrix& v,
                           const std::vector<PolicyPrediction>& predictions, const BlendOptions& options) {
  if (predictions.empty() || static_cast<std::size_t>(v.rows()) != predictions.size()) {
    throw std::invalid_argument("blend: one prediction per policy required");
  }
  const Eigen::VectorXd w = blend_weights(o, v);
  const std::size_t t = predictions.front().behaviors.size();
  std::vector<Behavior> blended(t);
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i].behaviors.size() != t) throw std::invalid_argument("blend: horizon mismatch");
    for (std::size_t k = 0; k < t; ++k) {
      blended[k].linear += w[static_cast<Eigen::Index>(i)] * predictions[i].behaviors[k].linear;
      blended[k].angular += w[static_cast<Eigen::Index>(i)] * predictions[i].behaviors[k].angular;
    }
  }
  if (options.clamp) {
    for (auto& b : blended) b = options.limits.clamp(b);
  }
  const RobotState start = predictions.front().states.empty() ? RobotState{} : predictions.front().states.front();
  return integrate(start, blended, options.dt);
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index k = 0; k < m.cols(); ++k) row[static_cast<std::size_t>(k)] = m(i, k);
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("expected a non-empty matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != cols) throw std::invalid_argument("ragged matrix");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

constexpr int kInstanceVersion = 1;

}  // namespace

nlohmann::json to_json(const NegotiationInstance& inst) {
  nlohmann::json j;
  j["format"] = "nauts-negotiation-instance";
  j["version"] = kInstanceVersion;
  j["observation"] = std::vector<double>(inst.observation.features().begin(), inst.observation.features().end());
  j["regrets"] = matrix_json(inst.regrets.per_policy);
  j["v_init"] = matrix_json(inst.v_init);
  return j;
}

NegotiationInstance instance_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "nauts-negotiation-instance") throw std::invalid_argument("not a negotiation instance");
  if (j.value("version", 0) != kInstanceVersion) {
    throw std::invalid_argument("unsupported negotiation instance version " + j.value("version", nlohmann::json()).dump());
  }
  NegotiationInstance inst;
  inst.observation = ObservationVector(j.at("observation").get<std::vector<double>>());
  inst.regrets = RegretVector::from_rows(matrix_from(j.at("regrets")));
  inst.v_init = matrix_from(j.at("v_init"));
  return inst;
}

nlohmann::json to_json(const SolveResult& r) {
  nlohmann::json j;
  j["format"] = "nauts-negotiation-result";
  j["version"] = kInstanceVersion;
  j["v"] = matrix_json(r.v);
  j["iterations"] = r.diagnostics.iterations;
  j["objective_trace"] = r.diagnostics.objective_trace;
  j["converged"] = r.diagnostics.converged;
  j["status"] = std::string(to_string(r.diagnostics.status));
  j["stationarity_residual"] = r.diagnostics.stationarity_residual;
  j["backtracks"] = r.diagnostics.backtracks;
  return j;
}

SolveResult solve_result_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "nauts-negotiation-result") throw std::invalid_argument("not a negotiation result");
  if (j.value("version", 0) != kInstanceVersion) throw std::invalid_argument("unsupported negotiation result version");
  SolveResult r;
  r.v = matrix_from(j.at("v"));
  auto& d = r.diagnostics;
  d.iterations = j.at("iterations").get<std::size_t>();
  d.objective_trace = j.at("objective_trace").get<std::vector<double>>();
  d.converged = j.at("converged").get<bool>();
  const auto status = j.at("status").get<std::string>();
  d.status = status == "converged" ? SolveStatus::kConverged
             : status == "stalled" ? SolveStatus::kStalled
                                   : SolveStatus::kMaxIterations;
  d.stationarity_residual = j.at("stationarity_residual").get<double>();
  d.backtracks = j.value("backtracks", std::size_t{0});
  return r;
}

std::string_view to_string(SolveStatus status) noexcept {
  switch (status) {
    case SolveStatus::kConverged: return "converged";
    case SolveStatus::kStalled: return "stalled";
    case SolveStatus::kMaxIterations: return "max_iterations";
  }
  return "unknown";
}

}  // namespace nauts
