#pragma once

// Experiment pipeline behind the CLI: dataset generation, training, trial
// batches and plot data. Every step is a pure function of its configuration
// and seed.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nauts/predictor.hpp"
#include "nauts/simulator.hpp"

namespace nauts {

/// File missing, unreadable, unwritable or malformed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent or incomplete experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Datasets

inline constexpr int kDatasetFormatVersion = 1;

struct GenDataConfig {
  std::vector<std::string> policies;  // empty = the standard library
  std::size_t episodes = 60;
  std::size_t ticks = 60;  // per episode
  std::size_t horizon = 9;
  std::uint64_t seed = 1;
  double min_goal_distance = 4.0;
  double obstacle_goal_fraction = 0.5;        // goals placed behind an obstacle
  double near_obstacle_start_fraction = 0.5;  // episodes starting next to an obstacle
};

struct Dataset {
  std::size_t q = 8;
  std::size_t horizon = 9;
  double dt = 0.1;
  std::vector<std::string> policies;
  std::vector<TrainingSamples> samples;  // one entry per policy
};

/// Rolls every policy out on the scenario world from seeded random starts and
/// goals and cuts the runs into sliding windows of `horizon` steps. Goals are
/// redrawn whenever one is reached; a fraction of them sits just behind an
/// obstacle and a fraction of the episodes start right next to one, facing
/// it, so that every policy meets obstacles head on.
Dataset generate_dataset(const Scenario& scenario, const GenDataConfig& config);

/// Sliding windows over one recorded run: states[k], commands[k] executed
/// from states[k] and observations[k] sensed at states[k]. States are in the
/// body frame of the window start and the sample goal is the displacement the
/// window actually achieved.
TrainingSamples window_samples(const std::vector<RobotState>& states, const std::vector<Behavior>& commands,
                               const std::vector<ObservationVector>& observations, std::size_t horizon);

void write_dataset(std::ostream& out, const Dataset& d);
void write_dataset(const std::filesystem::path& path, const Dataset& d);
/// Throws IoError naming the path/line on malformed files or unknown versions.
Dataset read_dataset(std::istream& in, const std::string& origin = "<stream>");
Dataset read_dataset(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Training

struct TrainOutputs {
  std::vector<std::filesystem::path> model_files;
  std::filesystem::path loss_curve;
  std::vector<TrainResult> results;
};

/// Trains one model per policy in the dataset, writing model_<policy>.json
/// and loss_curve.csv into `out_dir`.
TrainOutputs train_models(const Dataset& dataset, const PredictorArch& arch, const TrainConfig& config,
                          const std::filesystem::path& out_dir, bool parallel = true);

std::filesystem::path model_path(const std::filesystem::path& dir, const std::string& policy);

// ---------------------------------------------------------------------------
// Trial batches

enum class ControllerMode { kNauts, kSinglePolicy, kUniformBlend };

struct ExperimentConfig {
  std::filesystem::path scenario;
  double lambda1 = 0.1;
  double lambda2 = 10.0;
  double lambda3 = 1.0;
  double lambda4 = 0.1;
  std::size_t horizon = 9;
  std::size_t trials = 10;
  std::uint64_t seed = 1;
  ControllerMode mode = ControllerMode::kNauts;
  std::string single_policy = "obstacle_avoidance";
  std::vector<std::string> policies;  // empty = the standard library
  std::filesystem::path models;       // directory with model_<policy>.json
  std::filesystem::path out;          // empty = do not write files
  std::size_t negotiation_period = 20;
  bool parallel = true;

  /// Throws ConfigError.
  void validate() const;
  std::string mode_label() const;
};

/// Parses "nauts", "uniform_blend", "single_policy" or
/// "single_policy(<name>)"; the policy name, if any, goes to *policy.
ControllerMode parse_mode(const std::string& text, std::string* policy);

struct TrialResult {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  MetricsReport metrics;
  RunTrace trace;
  std::vector<NegotiationRecord> negotiations;
};

struct MetricsTable {
  std::string mode;
  std::string scenario;
  std::size_t trials = 0;
  std::size_t failures = 0;
  std::optional<double> traversal_time;     // mean over successful trials
  std::optional<double> distance_traveled;  // mean over successful trials
  std::optional<double> adaptation_time;    // mean over trials where it is defined

  void write_csv(std::ostream& out) const;
  void write_text(std::ostream& out) const;
};

MetricsTable summarize(const std::vector<TrialResult>& trials, const std::string& mode, const std::string& scenario);

struct RunOutputs {
  std::vector<TrialResult> trials;
  MetricsTable table;
};

/// Per-trial seed derived from the experiment seed.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial);

/// Loads the scenario (and models when the mode needs them), runs every
/// trial and, when `out` is set, writes trace_<k>.csv, metrics_<k>.json,
/// trials.csv, table.csv and table.txt.
RunOutputs run_experiment(const ExperimentConfig& config);

/// Same, with the scenario and models already in memory.
RunOutputs run_trials(const Scenario& scenario, const ExperimentConfig& config,
                      const std::vector<PredictorParams>& models);

// ---------------------------------------------------------------------------
// Plot data

/// Tick-indexed policy importance (o . v^i normalized to sum 1) for each
/// trace, one CSV block with a union of policy columns.
void write_importance(std::ostream& out, const std::vector<std::filesystem::path>& traces);

}  // namespace nauts
