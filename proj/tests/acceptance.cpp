// Acceptance run: one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "nauts/experiment.hpp"
#include "support.hpp"

namespace {

using namespace nauts;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// Solver criteria share their instances.

struct SolverRun {
  double objective = 0.0;
  double stationarity = 0.0;
  double min_row_norm = 0.0;
  bool monotone = true;
  double oracle = 0.0;
};

std::vector<SolverRun> criterion1_runs;
std::vector<SolverRun> criterion2_runs;
double criterion1_seconds = 0.0;
double criterion2_seconds = 0.0;

SolverRun solve_one(const testing::Instance& in, std::size_t n) {
  const SolveResult r = solve_negotiation(in.o, in.regrets, uniform_weights(in.o, n));
  SolverRun run;
  run.objective = r.objective();
  const auto& tr = r.diagnostics.objective_trace;
  for (std::size_t k = 1; k < tr.size(); ++k) run.monotone = run.monotone && tr[k] <= tr[k - 1] + 1e-9;
  run.stationarity = stationarity(r.v, in.o, in.regrets).max_relative;
  run.min_row_norm = r.v.rowwise().norm().minCoeff();
  return run;
}

Outcome criterion1() {
  std::mt19937_64 rng(101);
  const auto t0 = Clock::now();
  std::size_t bad = 0;
  for (int t = 0; t < 100; ++t) {
    criterion1_runs.push_back(solve_one(testing::random_instance(5, 8, 9, rng), 5));
    bad += criterion1_runs.back().monotone ? 0 : 1;
  }
  criterion1_seconds = seconds_since(t0);
  return {bad == 0 && criterion1_seconds < 10.0,
          format("100 instances N=5 q=8 T=9, non-monotone traces %zu, %.2f s (limit 10 s)", bad, criterion1_seconds)};
}

Outcome criterion2() {
  std::mt19937_64 rng(202);
  const auto t0 = Clock::now();
  double worst_gap = 0.0;
  std::size_t outside = 0, below = 0;
  for (int t = 0; t < 50; ++t) {
    const auto in = testing::random_instance(3, 4, 9, rng);
    SolverRun run = solve_one(in, 3);
    run.oracle = oracle_solve(in.o, in.regrets, 1.0, 0.1).objective;
    const double gap = (run.objective - run.oracle) / run.oracle;
    worst_gap = std::max(worst_gap, std::abs(gap));
    if (std::abs(gap) > 0.05) ++outside;
    // Solver tolerance is relative 1e-8.
    if (run.objective < run.oracle - 1e-6 - 1e-8 * run.oracle) ++below;
    criterion2_runs.push_back(run);
  }
  criterion2_seconds = seconds_since(t0);
  return {outside == 0 && below == 0 && criterion2_seconds < 60.0,
          format("50 instances N=3 q=4 T=9, max |gap| %.3g (limit 0.05), outside %zu, below oracle %zu, %.2f s", worst_gap,
                 outside, below, criterion2_seconds)};
}

Outcome criterion3() {
  double worst = 0.0;
  for (const auto* set : {&criterion1_runs, &criterion2_runs}) {
    for (const auto& r : *set) worst = std::max(worst, r.stationarity);
  }
  return {worst <= 1e-6 && !criterion1_runs.empty(),
          format("max residual / (1 + |rhs|) %.3g over %zu solves (limit 1e-6)", worst,
                 criterion1_runs.size() + criterion2_runs.size())};
}

Outcome criterion4() {
  double smallest = std::numeric_limits<double>::infinity();
  for (const auto* set : {&criterion1_runs, &criterion2_runs}) {
    for (const auto& r : *set) smallest = std::min(smallest, r.min_row_norm);
  }
  return {smallest > 0.0 && !criterion1_runs.empty(), format("min_i |v^i| = %.3g", smallest)};
}

Outcome criterion5() {
  const std::vector<Behavior> none{Behavior{}};
  const std::vector<Behavior> last3(3, Behavior{1, 0});
  const double a = regret_value(Goal{1, 0}, Goal{0.5, 0}, none, 9);
  const double b = regret_value(Goal{1, 0}, Goal{0, 1}, none, 9);
  const double c = regret_value(Goal{1, 0}, Goal{1, 1}, last3, 9);
  const double c_expected = std::sqrt(2.0) - 1.0 + 3.0;
  const bool pass = std::abs(a) <= 1e-6 && std::abs(b - 1000.0) <= 1e-6 && std::abs(c - c_expected) <= 1e-6;
  return {pass, format("aligned %.9g, orthogonal %.9g, hand-computed %.9g (expected %.9g)", a, b, c, c_expected)};
}

Outcome criterion6() {
  const Objective sq = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
  };
  std::vector<double> x(10, 0.0);
  x[0] = 1.0;
  const auto g = zo_gradient_estimate(sq, x, 1e-3, 100000, 606);
  double worst = 0.0;
  for (std::size_t i = 0; i < 10; ++i) worst = std::max(worst, std::abs(g[i] - (i == 0 ? 2.0 : 0.0)));

  ZoConfig cfg;
  cfg.mu = 1e-3;
  cfg.step_size = 0.05;
  cfg.directions = 10;
  cfg.iterations = (10000 - 1) / (cfg.directions + 1);
  cfg.seed = 607;
  const ZoResult r = zo_minimize(sq, x, cfg);
  const bool pass = worst <= 0.05 && r.best_value <= 1e-2 && r.evaluations <= 10000;
  return {pass, format("max coordinate error %.4f (limit 0.05); descent f = %.3g after %zu evaluations", worst,
                       r.best_value, r.evaluations)};
}

Outcome criterion7() {
  const auto train_set = testing::linear_policy_samples(2000, 701);
  const auto test_set = testing::linear_policy_samples(500, 702);
  const auto t0 = Clock::now();
  const TrainResult r = train(train_set, PredictorArch{}, TrainConfig{});
  const double secs = seconds_since(t0);
  const double mse = testing::behavior_mse(r.params, test_set);
  bool exact = true;
  for (const auto& s : test_set) exact = exact && testing::kinematically_exact(predict(r.params, s.observation, s.goal));
  return {mse < 0.05 && exact,
          format("held-out behavior MSE %.4f (limit 0.05), kinematics exact %s, training %.1f s", mse,
                 exact ? "yes" : "no", secs)};
}

// ---------------------------------------------------------------------------
// Scenario criteria share the trained models.

fs::path g_work;
fs::path g_models;
std::string g_train_note;

void ensure_models() {
  if (!g_models.empty()) return;
  const auto t0 = Clock::now();
  const Scenario training = load_scenario(fs::path(NAUTS_SOURCE_DIR) / "scenarios" / "training.yaml");
  const Dataset d = generate_dataset(training, GenDataConfig{});
  g_models = g_work / "models";
  train_models(d, PredictorArch{}, TrainConfig{}, g_models, true);
  g_train_note = format("gen-data + train %.1f s", seconds_since(t0));
}

fs::path tall_grass() { return fs::path(NAUTS_SOURCE_DIR) / "scenarios" / "tall_grass.yaml"; }

Outcome criterion8() {
  ensure_models();
  ExperimentConfig cfg;
  cfg.scenario = tall_grass();
  cfg.models = g_models;
  cfg.trials = 10;
  const auto t0 = Clock::now();
  const RunOutputs nauts_run = run_experiment(cfg);
  cfg.mode = ControllerMode::kSinglePolicy;
  cfg.single_policy = "obstacle_avoidance";
  const RunOutputs oa_run = run_experiment(cfg);
  const double secs = seconds_since(t0);
  std::size_t wins = 0;
  for (std::size_t k = 0; k < 10; ++k) {
    const auto& a = nauts_run.trials[k].metrics;
    const auto& b = oa_run.trials[k].metrics;
    if (!a.failure && (b.failure || a.traversal_time < b.traversal_time)) ++wins;
  }
  const auto tt = [](const MetricsTable& t) { return t.traversal_time.value_or(-1.0); };
  const bool pass = wins >= 8 && nauts_run.table.failures <= oa_run.table.failures && secs < 300.0;
  return {pass, format("paired TT wins %zu/10 (need 8), FR %zu vs %zu, mean TT %.2f s vs %.2f s, trials %.1f s, %s",
                       wins, nauts_run.table.failures, oa_run.table.failures, tt(nauts_run.table), tt(oa_run.table),
                       secs, g_train_note.c_str())};
}

Outcome criterion9() {
  std::mt19937_64 rng(909);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto in = testing::random_instance(5, 8, 9, rng);
    const auto v0 = uniform_weights(in.o, 5);
    const auto t0 = Clock::now();
    const auto r = solve_negotiation(in.o, in.regrets, v0);
    worst = std::max(worst, 1e3 * seconds_since(t0));
    if (r.v.size() == 0) return {false, "empty solution"};
  }
  return {worst < 100.0, format("slowest of 100 solves %.3f ms (limit 100 ms)", worst)};
}

Outcome criterion10() {
  ensure_models();
  const Scenario sc = load_scenario(tall_grass());
  std::vector<PredictorParams> models;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < kPolicyKindCount; ++i) {
    names.emplace_back(policy_name(static_cast<PolicyKind>(i)));
    models.push_back(load_model(model_path(g_models, names.back())));
  }
  NautsConfig nc;
  nc.negotiation_period = 1;
  nc.record_cold_start = true;
  NautsController ctl(models, names, nc);
  SimConfig sim = sc.sim;
  sim.timeout = 200 * sim.dt;
  sim.seed = trial_seed(1, 0);
  const auto r = run_episode(sc.instantiate(sim.seed), sim, ctl);
  double warm = 0.0, cold = 0.0;
  for (const auto& rec : ctl.negotiations()) {
    warm += static_cast<double>(rec.iterations);
    cold += static_cast<double>(rec.cold_iterations);
  }
  const double n = static_cast<double>(ctl.negotiations().size());
  const bool pass = n > 0 && warm / n < cold / n;
  return {pass, format("%zu ticks, %.0f solves, mean iterations warm %.3f vs cold %.3f", r.metrics.ticks, n, warm / n,
                       cold / n)};
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome criterion11() {
  ensure_models();
  ExperimentConfig cfg;
  cfg.scenario = tall_grass();
  cfg.models = g_models;
  cfg.trials = 10;
  cfg.seed = 1111;
  cfg.out = g_work / "det_a";
  run_experiment(cfg);
  cfg.out = g_work / "det_b";
  run_experiment(cfg);
  bool same = true;
  for (const char* f : {"table.csv", "table.txt", "trials.csv"}) {
    const std::string a = read_text(g_work / "det_a" / f);
    same = same && !a.empty() && a == read_text(g_work / "det_b" / f);
  }
  return {same, same ? "table.csv, table.txt and trials.csv byte-identical" : "tables differ"};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  g_work = fs::temp_directory_path() / "nauts_acceptance";
  fs::remove_all(g_work);
  fs::create_directories(g_work);

  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},   {5, criterion5},  {6, criterion6},
      {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}, {11, criterion11}};
  int failed = 0;
  for (const auto& [id, run] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
  }
  fs::remove_all(g_work);
  return failed == 0 ? 0 : 1;
}
