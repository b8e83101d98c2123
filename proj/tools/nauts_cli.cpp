// nauts: dataset generation, predictor training, trial batches, plot data.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include "nauts/experiment.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kIo = 2, kNumeric = 3 };

// Values from --config replace the corresponding flags.
template <typename T>
void override(const YAML::Node& cfg, const char* key, T& target) {
  if (cfg && cfg[key]) target = cfg[key].as<T>();
}

YAML::Node load_config(const std::string& path) {
  if (path.empty()) return {};
  try {
    return YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw nauts::IoError("cannot open config file " + path);
  } catch (const YAML::Exception& e) {
    throw nauts::ConfigError("config file " + path + ": " + e.what());
  }
}

struct GenDataArgs {
  std::string scenario;
  std::string out = "dataset.csv";
  std::string config;
  nauts::GenDataConfig gen;
};

struct TrainArgs {
  std::string dataset;
  std::string out = "models";
  std::string config;
  nauts::TrainConfig train;
  nauts::PredictorArch arch;
  bool serial = false;
};

struct RunArgs {
  std::string scenario;
  std::string mode = "nauts";
  std::string models;
  std::string out;
  std::string config;
  nauts::ExperimentConfig exp;
  bool serial = false;
};

struct PlotArgs {
  std::vector<std::string> traces;
  std::string out;
};

int cmd_gen_data(GenDataArgs& a) {
  const YAML::Node cfg = load_config(a.config);
  override(cfg, "scenario", a.scenario);
  override(cfg, "out", a.out);
  override(cfg, "episodes", a.gen.episodes);
  override(cfg, "ticks", a.gen.ticks);
  override(cfg, "horizon", a.gen.horizon);
  override(cfg, "seed", a.gen.seed);
  override(cfg, "policies", a.gen.policies);
  if (a.scenario.empty()) throw nauts::ConfigError("gen-data: --scenario is required");
  nauts::Scenario sc;
  try {
    sc = nauts::load_scenario(a.scenario);
  } catch (const std::runtime_error& e) {
    throw nauts::IoError(e.what());
  }
  const nauts::Dataset d = nauts::generate_dataset(sc, a.gen);
  if (a.gen.episodes == 0) std::cerr << "warning: 0 episodes requested, writing an empty dataset\n";
  nauts::write_dataset(std::filesystem::path(a.out), d);
  for (std::size_t p = 0; p < d.policies.size(); ++p) {
    std::cout << d.policies[p] << ": " << d.samples[p].size() << " samples\n";
  }
  std::cout << "wrote " << a.out << '\n';
  return kOk;
}

int cmd_train(TrainArgs& a) {
  const YAML::Node cfg = load_config(a.config);
  override(cfg, "dataset", a.dataset);
  override(cfg, "out", a.out);
  override(cfg, "lambda1", a.train.lambda1);
  override(cfg, "lambda2", a.train.lambda2);
  override(cfg, "iterations", a.train.zo.iterations);
  override(cfg, "directions", a.train.zo.directions);
  override(cfg, "step_size", a.train.zo.step_size);
  override(cfg, "mu", a.train.zo.mu);
  override(cfg, "seed", a.train.zo.seed);
  override(cfg, "batch_size", a.train.batch_size);
  override(cfg, "features", a.arch.feature_count);
  if (a.dataset.empty()) throw nauts::ConfigError("train: --dataset is required");
  if (!std::filesystem::exists(a.dataset)) throw nauts::IoError("dataset not found: " + a.dataset);
  const nauts::Dataset d = nauts::read_dataset(std::filesystem::path(a.dataset));
  const auto out = nauts::train_models(d, a.arch, a.train, a.out, !a.serial);
  for (std::size_t p = 0; p < d.policies.size(); ++p) {
    const auto& r = out.results[p];
    std::cout << d.policies[p] << ": loss " << r.initial.total << " -> " << r.final.total << "  ("
              << out.model_files[p].string() << ")\n";
  }
  std::cout << "loss curve: " << out.loss_curve.string() << '\n';
  return kOk;
}

int cmd_run(RunArgs& a) {
  const YAML::Node cfg = load_config(a.config);
  auto& e = a.exp;
  override(cfg, "scenario", a.scenario);
  override(cfg, "mode", a.mode);
  override(cfg, "models", a.models);
  override(cfg, "out", a.out);
  override(cfg, "trials", e.trials);
  override(cfg, "seed", e.seed);
  override(cfg, "lambda1", e.lambda1);
  override(cfg, "lambda2", e.lambda2);
  override(cfg, "lambda3", e.lambda3);
  override(cfg, "lambda4", e.lambda4);
  override(cfg, "horizon", e.horizon);
  override(cfg, "negotiation_period", e.negotiation_period);
  override(cfg, "policies", e.policies);
  if (a.scenario.empty()) throw nauts::ConfigError("run: --scenario is required");
  e.scenario = a.scenario;
  e.models = a.models;
  e.out = a.out;
  e.mode = nauts::parse_mode(a.mode, &e.single_policy);
  e.parallel = !a.serial;
  const auto res = nauts::run_experiment(e);
  res.table.write_text(std::cout);
  std::cout << '\n';
  res.table.write_csv(std::cout);
  return kOk;
}

int cmd_plot_data(PlotArgs& a) {
  std::vector<std::filesystem::path> paths(a.traces.begin(), a.traces.end());
  if (a.out.empty()) {
    nauts::write_importance(std::cout, paths);
    return kOk;
  }
  std::ofstream out(a.out, std::ios::binary);
  if (!out) throw nauts::IoError("cannot write " + a.out);
  nauts::write_importance(out, paths);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Policy negotiation experiments: gen-data, train, run, plot-data"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* g = app.add_subcommand("gen-data", "Roll out the policy library and write a training dataset");
  g->add_option("--scenario", gen.scenario, "Scenario YAML file");
  g->add_option("--episodes", gen.gen.episodes, "Episodes per policy");
  g->add_option("--ticks", gen.gen.ticks, "Control ticks per episode");
  g->add_option("--horizon", gen.gen.horizon, "Prediction horizon T");
  g->add_option("--seed", gen.gen.seed, "Seed");
  g->add_option("--policies", gen.gen.policies, "Policy names (default: all five)");
  g->add_option("--out", gen.out, "Dataset file");
  g->add_option("--config", gen.config, "YAML file whose keys override the flags");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Fit one prediction model per policy");
  t->add_option("--dataset", tr.dataset, "Dataset file from gen-data");
  t->add_option("--lambda1", tr.train.lambda1, "Likelihood weight");
  t->add_option("--lambda2", tr.train.lambda2, "Goal-reaching weight");
  t->add_option("--iterations", tr.train.zo.iterations, "Zeroth-order iterations (0 keeps the initialization)");
  t->add_option("--directions", tr.train.zo.directions, "Random directions per gradient estimate");
  t->add_option("--step-size", tr.train.zo.step_size, "Initial step size");
  t->add_option("--mu", tr.train.zo.mu, "Smoothing radius");
  t->add_option("--seed", tr.train.zo.seed, "Seed of the random directions and minibatches");
  t->add_option("--batch-size", tr.train.batch_size, "Minibatch size (0 = full dataset every iteration)");
  t->add_option("--features", tr.arch.feature_count, "Random Fourier features");
  t->add_option("--out", tr.out, "Output directory");
  t->add_flag("--serial", tr.serial, "Train the policies one after another");
  t->add_option("--config", tr.config, "YAML file whose keys override the flags");

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run a batch of seeded trials and tabulate FR/TT/DT/AT");
  r->add_option("--scenario", run.scenario, "Scenario YAML file");
  r->add_option("--trials", run.exp.trials, "Number of trials");
  r->add_option("--seed", run.exp.seed, "Experiment seed");
  r->add_option("--mode", run.mode, "nauts | uniform_blend | single_policy(<name>)");
  r->add_option("--lambda1", run.exp.lambda1, "Likelihood weight (recorded)");
  r->add_option("--lambda2", run.exp.lambda2, "Goal-reaching weight (recorded)");
  r->add_option("--lambda3", run.exp.lambda3, "Regret fit weight");
  r->add_option("--lambda4", run.exp.lambda4, "Exploration norm weight");
  r->add_option("--horizon", run.exp.horizon, "Prediction horizon T");
  r->add_option("--negotiation-period", run.exp.negotiation_period, "Control ticks between negotiations");
  r->add_option("--models", run.models, "Directory with model_<policy>.json");
  r->add_option("--out", run.out, "Output directory for traces and tables");
  r->add_flag("--serial", run.serial, "Run trials one after another");
  r->add_option("--config", run.config, "YAML file whose keys override the flags");

  PlotArgs plot;
  auto* p = app.add_subcommand("plot-data", "Normalized policy importance per tick from run traces");
  p->add_option("traces", plot.traces, "Trace CSV files");
  p->add_option("--out", plot.out, "Output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*g) return cmd_gen_data(gen);
    if (*t) return cmd_train(tr);
    if (*r) return cmd_run(run);
    if (*p) return cmd_plot_data(plot);
  } catch (const nauts::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const nauts::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const nauts::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
  return kUsage;
}
