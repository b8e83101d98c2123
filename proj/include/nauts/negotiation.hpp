#pragma once

// Regret-driven negotiation among a library of N policies.
//
// V holds one weight vector per policy. Row i of a WeightMatrix is v^i in R^q,
// so the blending coefficient of policy i under observation o is o . v^i.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "nauts/core.hpp"
#include "nauts/predictor.hpp"

namespace nauts {

using WeightMatrix = Eigen::MatrixXd;  // N x q, row i = v^i

struct RegretConfig {
  double r_max = 1e3;
  double epsilon = 1e-3;
};

/// Alignment term ||g|| ||s|| / (g . s) - 1, clamped to [0, r_max]. Returns
/// r_max when s = 0 or g . s <= epsilon ||g|| ||s||. Throws on zero goal.
double alignment_regret(const Goal& g, const Goal& displacement, const RegretConfig& config = {});

/// Effort term sum_j (n - 1 - j) |a_j|^2 over the last min(n, horizon + 1)
/// entries of `history` (oldest first); the newest behavior carries weight 0.
double effort_regret(std::span<const Behavior> history, std::size_t horizon);

/// Alignment plus effort for one evaluation point.
double regret_value(const Goal& g, const Goal& displacement, std::span<const Behavior> history,
                    std::size_t horizon, const RegretConfig& config = {});

/// T+1 per-step regrets along the prediction. Step h compares the goal with
/// the displacement reached after min(h + 1, T) predicted steps and charges
/// the effort of behaviors 0..min(h, T - 1).
std::vector<double> regret_sequence(const PolicyPrediction& prediction, const Goal& g,
                                    const RegretConfig& config = {});

struct RegretVector {
  Eigen::MatrixXd per_policy;      // N x (T+1)
  Eigen::VectorXd pointwise_min;   // T+1

  static RegretVector from_rows(const Eigen::MatrixXd& per_policy);
  std::size_t policies() const noexcept { return static_cast<std::size_t>(per_policy.rows()); }
  std::size_t steps() const noexcept { return static_cast<std::size_t>(per_policy.cols()); }
  /// Non-negative, finite, and r* <= r^i everywhere.
  bool valid() const noexcept;
};

RegretVector compute_regrets(const std::vector<PolicyPrediction>& predictions, const Goal& g,
                             const RegretConfig& config = {});

/// sum_i ||V||_F / ||v^i||. Returns +infinity and sets *zero_column when any
/// row is exactly zero.
double exploration_norm(const WeightMatrix& v, bool* zero_column = nullptr);

/// lambda3 * sum_i sum_k (r*_k - (o . v^i) r^i_k)^2 + lambda4 * ||V||_E.
double objective_eq3(const WeightMatrix& v, const ObservationVector& o, const RegretVector& regrets,
                     double lambda3, double lambda4);

/// The linear system behind the closed-form column update:
///   A = lambda4 Q + 2 lambda3 sum_k (r^i_k)^2 o o^T,  b = 2 lambda3 sum_k r*_k r^i_k o.
/// With `scalar_literal` the outer product o o^T is replaced by (o . o) I.
struct ColumnSystem {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
};
ColumnSystem column_system(std::size_t i, const ObservationVector& o, const RegretVector& regrets,
                           const Eigen::MatrixXd& q_matrix, double lambda3, double lambda4,
                           bool scalar_literal = false);

/// Solves A v = b for policy i. Throws NumericError naming the policy and
/// the reciprocal condition estimate when A is not numerically positive
/// definite.
Eigen::VectorXd closed_form_column(std::size_t i, const ObservationVector& o, const RegretVector& regrets,
                                   const Eigen::MatrixXd& q_matrix, double lambda3, double lambda4,
                                   bool scalar_literal = false);

/// I_q / (2 ||V||_E).
Eigen::MatrixXd q_matrix_for(const WeightMatrix& v);

/// Every row equal to o / (N ||o||^2): equal blending weights 1/N.
WeightMatrix uniform_weights(const ObservationVector& o, std::size_t n);

/// Adds the same multiple of o to every row so that sum_i o . v^i = 1.
WeightMatrix project_to_constraint(const WeightMatrix& v, const ObservationVector& o);

double constraint_violation(const WeightMatrix& v, const ObservationVector& o);

enum class ConstraintMode {
  kMultiplier,  // closed-form updates with the shared Lagrange multiplier folded in
  kProjection,  // unconstrained closed-form updates, then minimum-norm affine correction
};

struct SolverConfig {
  double lambda3 = 1.0;
  double lambda4 = 0.1;
  double tol = 1e-8;  // relative objective change
  std::size_t max_iters = 100;
  ConstraintMode constraint = ConstraintMode::kMultiplier;
  bool scalar_literal = false;
  bool safeguard = true;  // backtrack toward the previous iterate when a sweep raises the objective
  double monotone_slack = 1e-9;
  bool throw_on_increase = false;
};

enum class SolveStatus { kConverged, kStalled, kMaxIterations };

struct SolverDiagnostics {
  std::size_t iterations = 0;
  std::vector<double> objective_trace;  // initial point, then one entry per sweep
  bool converged = false;  // relative objective change fell below tol
  SolveStatus status = SolveStatus::kMaxIterations;
  double stationarity_residual = 0.0;  // max_i ||res_i|| / (1 + ||b_i||)
  std::size_t backtracks = 0;
};

struct SolveResult {
  WeightMatrix v;
  SolverDiagnostics diagnostics;
  double objective() const { return diagnostics.objective_trace.back(); }
};

/// Thrown by the solver's monotonicity check when enabled.
class ConsistencyError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Alternates Q <- I/(2||V||_E) with closed-form column updates until the
/// relative objective change drops below tol.
SolveResult solve_negotiation(const ObservationVector& o, const RegretVector& regrets, const WeightMatrix& v_init,
                              const SolverConfig& config = {});

struct StationarityReport {
  std::vector<double> residual_norms;
  std::vector<double> rhs_norms;
  double multiplier = 0.0;
  double max_relative = 0.0;

  bool within(double tol) const noexcept { return max_relative <= tol; }
};

/// Residual of A_i v^i - b_i + mu o with Q from `v` and the shared
/// multiplier mu fitted by least squares.
StationarityReport stationarity(const WeightMatrix& v, const ObservationVector& o, const RegretVector& regrets,
                                const SolverConfig& config = {});

/// Gradient of objective_eq3 with respect to V.
WeightMatrix objective_gradient(const WeightMatrix& v, const ObservationVector& o, const RegretVector& regrets,
                                double lambda3, double lambda4);

struct OracleConfig {
  std::size_t restarts = 8;
  std::size_t max_iters = 20000;
  double tol = 1e-13;
  std::uint64_t seed = 11;
};

struct OracleResult {
  WeightMatrix v;
  double objective = std::numeric_limits<double>::infinity();
  std::vector<double> restart_objectives;
};

/// Accelerated projected gradient descent on objective_eq3 over the
/// constraint hyperplane from several random starts. lambda4 may be 0.
OracleResult oracle_solve(const ObservationVector& o, const RegretVector& regrets, double lambda3, double lambda4,
                          const OracleConfig& config = {});

/// o . v^i for every policy.
Eigen::VectorXd blend_weights(const ObservationVector& o, const WeightMatrix& v);

struct BlendOptions {
  bool clamp = true;
  ActuatorLimits limits{};
  double dt = 0.1;
};

/// Weighted sum of the predicted behavior sequences, optionally clamped,
/// integrated from the first prediction's initial state.
Trajectory blend_behaviors(const ObservationVector& o, const WeightMatrix& v,
                           const std::vector<PolicyPrediction>& predictions, const BlendOptions& options = {});

// JSON round trip for golden tests.
struct NegotiationInstance {
  ObservationVector observation;
  RegretVector regrets;
  WeightMatrix v_init;
};

nlohmann::json to_json(const NegotiationInstance& instance);
NegotiationInstance instance_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SolveResult& result);
SolveResult solve_result_from_json(const nlohmann::json& j);

std::string_view to_string(SolveStatus status) noexcept;

}  // namespace nauts
