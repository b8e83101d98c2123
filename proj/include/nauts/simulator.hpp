#pragma once

// Deterministic 2D terrain worlds, episode runner, metrics and controllers.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "nauts/core.hpp"
#include "nauts/kinematics.hpp"
#include "nauts/negotiation.hpp"
#include "nauts/policies.hpp"
#include "nauts/predictor.hpp"

namespace nauts {

enum class TerrainClass { kConcrete, kShortGrass, kGravel, kMediumRocks, kLargeRocks, kTallGrass, kForest };
inline constexpr std::size_t kTerrainClassCount = 7;

std::string_view terrain_name(TerrainClass c) noexcept;
/// Throws std::invalid_argument for unknown names.
TerrainClass terrain_from_name(std::string_view name);

struct TerrainProperties {
  double ruggedness = 0.0;  // fed to the adaptive policy
  double traction = 1.0;    // scales the executed linear velocity
  double slip = 0.0;        // half-width of the uniform traction noise
};

using TerrainTable = std::array<TerrainProperties, kTerrainClassCount>;
TerrainTable default_terrain_table();

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Disc {
  double x = 0.0;
  double y = 0.0;
  double radius = 0.0;
};

struct WorldModel {
  std::size_t width = 0;   // cells along x
  std::size_t height = 0;  // cells along y
  double cell_size = 0.5;
  std::vector<TerrainClass> grid;  // row-major, row = y index
  std::vector<Disc> hard_obstacles;
  std::vector<Disc> occluded_obstacles;  // hidden until the robot comes within the reveal radius
  RobotState start;
  Point goal;
  TerrainTable terrain = default_terrain_table();

  static WorldModel uniform(std::size_t width, std::size_t height, double cell_size, TerrainClass fill);

  double extent_x() const noexcept { return static_cast<double>(width) * cell_size; }
  double extent_y() const noexcept { return static_cast<double>(height) * cell_size; }
  bool in_bounds(double x, double y) const noexcept;
  /// Class of the cell containing (x, y); points outside map to the nearest edge cell.
  TerrainClass terrain_at(double x, double y) const;
  const TerrainProperties& properties_at(double x, double y) const { return terrain[static_cast<std::size_t>(terrain_at(x, y))]; }
  /// Sets every cell whose center lies in [x0, x1) x [y0, y1) (meters).
  void fill_rect(double x0, double y0, double x1, double y1, TerrainClass c);
  Goal goal_from(const RobotState& s) const { return Goal{goal.x - s.x, goal.y - s.y}; }
  /// Throws std::invalid_argument when start/goal are out of bounds or the
  /// goal lies inside a hard obstacle.
  void validate() const;
};

struct SimConfig {
  double dt = 0.1;
  ActuatorLimits limits{};
  double timeout = 120.0;
  double stuck_window = 5.0;
  double stuck_threshold = 0.05;
  double goal_tolerance = 0.5;
  double reveal_radius = 1.5;
  double robot_radius = 0.3;
  double sensing_radius = 5.0;
  double cone_half_angle = kPi / 4.0;
  double goal_distance_scale = 10.0;  // goal distance feature saturates here
  std::size_t q = 8;
  Integrator integrator = Integrator::kExactArc;
  std::uint64_t seed = 1;
  /// Classes seen during training; entering any other class starts the
  /// adaptation-time clock. Empty means every class is known.
  std::vector<TerrainClass> training_terrains;
  double adaptation_reference_window = 5.0;

  void validate() const;
  std::size_t stuck_ticks() const;
};

/// Per-episode visibility of the occluded obstacles.
struct RevealState {
  std::vector<bool> revealed;
  std::vector<double> reveal_time;

  explicit RevealState(const WorldModel& world)
      : revealed(world.occluded_obstacles.size(), false), reveal_time(world.occluded_obstacles.size(), -1.0) {}
  /// Reveals every occluded obstacle whose surface lies within the reveal
  /// radius of the robot center. Returns true when anything changed.
  bool update(const RobotState& s, const WorldModel& world, const SimConfig& config, double time);
};

/// Visible obstacles: all hard ones plus the revealed occluded ones.
std::vector<Disc> visible_obstacles(const WorldModel& world, const RevealState& reveal);

/// Observation layout for q = 8:
///   [bias, smooth, rocky, tall grass, forest, left proximity, right proximity, goal distance]
/// with smooth = concrete + short grass and rocky = gravel + medium + large
/// rocks. For q >= 11 the seven classes get their own bins and any entries past
/// the eleventh are zero. Throws std::invalid_argument for q < 8.
ObservationVector synthesize_observation(const RobotState& s, const WorldModel& world, const RevealState& reveal,
                                         const SimConfig& config);

/// Index of the coarse or per-class histogram bin (1-based observation index).
std::size_t terrain_bin(TerrainClass c, std::size_t q);

/// Ground-truth policy inputs at `s`.
SensedEnvironment sense(const RobotState& s, const WorldModel& world, const RevealState& reveal,
                        const SimConfig& config, double time);

/// Executed velocities: traction and seeded slip scale the linear velocity; a
/// step that would push the robot deeper into any obstacle (visible or not)
/// zeroes the linear velocity. Angular velocity passes through.
Behavior apply_terrain_effects(const RobotState& s, const Behavior& a, const WorldModel& world,
                               const SimConfig& config, std::mt19937_64& rng);

/// True when the robot footprint at `s` overlaps an obstacle.
bool in_contact(const RobotState& s, const WorldModel& world, const SimConfig& config);

// ---------------------------------------------------------------------------
// Controllers

struct ControlInput {
  std::size_t tick = 0;
  double time = 0.0;
  RobotState state;
  ObservationVector observation;
  Goal goal;  // body frame of `state`
  SensedEnvironment environment;
};

/// Extra per-tick data a controller may expose to the trace.
struct ControlAnnotation {
  std::vector<double> weights;  // o . v^i
  std::vector<double> regrets;  // mean regret over the horizon
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::size_t solver_iterations = 0;
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual Behavior act(const ControlInput& input) = 0;
  /// Names of the policies reported in the weight/regret trace columns.
  virtual std::vector<std::string> policy_columns() const { return {}; }
  virtual ControlAnnotation annotation() const { return {}; }
};

/// Runs one policy of the library on ground truth.
class PolicyController : public Controller {
 public:
  PolicyController(PolicyLibrary library, std::size_t index, std::uint64_t seed);
  Behavior act(const ControlInput& input) override;
  std::vector<std::string> policy_columns() const override;
  ControlAnnotation annotation() const override;

 private:
  PolicyLibrary library_;
  std::size_t index_;
  std::uint64_t seed_;
};

struct NautsConfig {
  SolverConfig solver{};
  RegretConfig regret{};
  std::size_t negotiation_period = 20;  // control ticks between negotiations
  bool negotiate = true;                // false keeps V at the uniform blend
  bool warm_start = true;
  bool record_cold_start = false;       // also solve each instance from the cold start
  bool keep_instances = false;
  BlendOptions blend{};
};

struct NegotiationRecord {
  std::size_t tick = 0;
  std::size_t iterations = 0;
  std::size_t cold_iterations = 0;
  bool converged = false;
  double objective = 0.0;
  double elapsed_ms = 0.0;
};

/// Predicts with every model, blends with the current V and executes the
/// first blended behavior; renegotiates V every `negotiation_period` ticks.
class NautsController : public Controller {
 public:
  NautsController(std::vector<PredictorParams> models, std::vector<std::string> names, NautsConfig config);

  Behavior act(const ControlInput& input) override;
  std::vector<std::string> policy_columns() const override { return names_; }
  ControlAnnotation annotation() const override { return annotation_; }

  const WeightMatrix& weights() const noexcept { return v_; }
  const std::vector<NegotiationRecord>& negotiations() const noexcept { return records_; }
  /// Instances seen by the solver with the warm start used; filled when
  /// keep_instances is set.
  const std::vector<NegotiationInstance>& instances() const noexcept { return instances_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  void negotiate(const ControlInput& input, const std::vector<PolicyPrediction>& predictions);

  std::vector<PredictorParams> models_;
  std::vector<std::string> names_;
  NautsConfig config_;
  WeightMatrix v_;
  bool have_v_ = false;
  RegretVector last_regrets_;
  ControlAnnotation annotation_;
  std::vector<NegotiationRecord> records_;
  std::vector<NegotiationInstance> instances_;
  std::vector<std::string> warnings_;
};

// ---------------------------------------------------------------------------
// Episodes

struct TraceRow {
  std::size_t tick = 0;
  double time = 0.0;
  RobotState state;
  Behavior command;
  double effective_linear = 0.0;
  TerrainClass terrain = TerrainClass::kConcrete;
  std::vector<double> weights;
  std::vector<double> regrets;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::size_t solver_iterations = 0;
};

inline constexpr int kTraceFormatVersion = 1;

struct RunTrace {
  std::vector<std::string> policy_names;
  std::vector<TraceRow> rows;

  void write_csv(std::ostream& out) const;
  /// Throws std::runtime_error naming the line on malformed input or an
  /// unsupported version.
  static RunTrace read_csv(std::istream& in);
};

struct MetricsReport {
  bool failure = false;
  std::string cause;  // empty on success
  double traversal_time = 0.0;
  double distance_traveled = 0.0;
  std::optional<double> adaptation_time;
  std::size_t ticks = 0;
  std::size_t contacts = 0;

  nlohmann::json to_json() const;
};

struct EpisodeResult {
  RunTrace trace;
  MetricsReport metrics;
};

/// Steps the world until the goal is reached, the robot is stuck, the
/// timeout elapses or the controller throws.
EpisodeResult run_episode(const WorldModel& world, const SimConfig& config, Controller& controller);

/// Adaptation time from a trace: first tick on a terrain class outside
/// `training`, reference speed = mean executed speed over the preceding
/// window, then time until the executed speed is back to half of it.
std::optional<double> adaptation_time(const RunTrace& trace, const std::vector<TerrainClass>& training, double dt,
                                      double reference_window);

// ---------------------------------------------------------------------------
// Scenarios

inline constexpr int kScenarioFormatVersion = 1;

struct Scenario {
  std::string name;
  WorldModel world;
  SimConfig sim;
  PolicyParams policy;
  double obstacle_jitter = 0.0;  // per-trial uniform displacement of obstacle centers (meters)
  double start_jitter = 0.0;     // per-trial lateral displacement of the start (meters)

  /// World for one trial; jitter is drawn from `seed`.
  WorldModel instantiate(std::uint64_t seed) const;
};

/// Throws std::runtime_error naming the file on I/O, format or version errors.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& yaml_text, const std::string& origin = "<string>");

}  // namespace nauts
