#include "nauts/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace nauts {
namespace {

constexpr std::array<std::string_view, kTerrainClassCount> kTerrainNames{
    "concrete", "short_grass", "gravel", "medium_rocks", "large_rocks", "tall_grass", "forest"};

constexpr std::size_t kConeRings = 10;
constexpr std::size_t kConeRays = 12;

double clearance(const RobotState& s, const Disc& d, double robot_radius) {
  return std::hypot(d.x - s.x, d.y - s.y) - d.radius - robot_radius;
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::string_view terrain_name(TerrainClass c) noexcept { return kTerrainNames[static_cast<std::size_t>(c)]; }

TerrainClass terrain_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kTerrainNames.size(); ++i) {
    if (kTerrainNames[i] == name) return static_cast<TerrainClass>(i);
  }
  throw std::invalid_argument("unknown terrain class '" + std::string(name) + "'");
}

TerrainTable default_terrain_table() {
  TerrainTable t{};
  t[static_cast<std::size_t>(TerrainClass::kConcrete)] = {0.0, 1.0, 0.0};
  t[static_cast<std::size_t>(TerrainClass::kShortGrass)] = {0.1, 0.95, 0.02};
  t[static_cast<std::size_t>(TerrainClass::kGravel)] = {0.4, 0.9, 0.03};
  t[static_cast<std::size_t>(TerrainClass::kMediumRocks)] = {0.6, 0.9, 0.04};
  t[static_cast<std::size_t>(TerrainClass::kLargeRocks)] = {1.0, 0.6, 0.05};
  t[static_cast<std::size_t>(TerrainClass::kTallGrass)] = {0.2, 0.8, 0.05};
  t[static_cast<std::size_t>(TerrainClass::kForest)] = {0.5, 0.9, 0.04};
  return t;
}

// ---------------------------------------------------------------------------
// WorldModel

WorldModel WorldModel::uniform(std::size_t width, std::size_t height, double cell_size, TerrainClass fill) {
  if (width == 0 || height == 0 || !(cell_size > 0.0)) throw std::invalid_argument("world: empty grid");
  WorldModel w;
  w.width = width;
  w.height = height;
  w.cell_size = cell_size;
  w.grid.assign(width * height, fill);
  return w;
}

bool WorldModel::in_bounds(double x, double y) const noexcept {
  return x >= 0.0 && y >= 0.0 && x <= extent_x() && y <= extent_y();
}

TerrainClass WorldModel::terrain_at(double x, double y) const {
  if (grid.empty()) throw std::logic_error("world: empty grid");
  const auto cx = static_cast<std::size_t>(std::clamp(std::floor(x / cell_size), 0.0, static_cast<double>(width - 1)));
  const auto cy = static_cast<std::size_t>(std::clamp(std::floor(y / cell_size), 0.0, static_cast<double>(height - 1)));
  return grid[cy * width + cx];
}

void WorldModel::fill_rect(double x0, double y0, double x1, double y1, TerrainClass c) {
  for (std::size_t cy = 0; cy < height; ++cy) {
    const double yc = (static_cast<double>(cy) + 0.5) * cell_size;
    if (yc < y0 || yc >= y1) continue;
    for (std::size_t cx = 0; cx < width; ++cx) {
      const double xc = (static_cast<double>(cx) + 0.5) * cell_size;
      if (xc >= x0 && xc < x1) grid[cy * width + cx] = c;
    }
  }
}

void WorldModel::validate() const {
  if (width == 0 || height == 0 || grid.size() != width * height || !(cell_size > 0.0)) {
    throw std::invalid_argument("world: grid size mismatch");
  }
  if (!start.valid() || !in_bounds(start.x, start.y)) throw std::invalid_argument("world: start out of bounds");
  if (!std::isfinite(goal.x) || !std::isfinite(goal.y) || !in_bounds(goal.x, goal.y)) {
    throw std::invalid_argument("world: goal out of bounds");
  }
  auto check = [](const Disc& d) {
    if (!std::isfinite(d.x) || !std::isfinite(d.y) || !(d.radius > 0.0)) {
      throw std::invalid_argument("world: obstacles need finite centers and positive radii");
    }
  };
  for (const auto& d : hard_obstacles) {
    check(d);
    if (std::hypot(goal.x - d.x, goal.y - d.y) <= d.radius) throw std::invalid_argument("world: goal inside an obstacle");
  }
  for (const auto& d : occluded_obstacles) check(d);
}

void SimConfig::validate() const {
  if (!(dt > 0.0) || !(timeout > 0.0) || !(stuck_window > 0.0) || !(stuck_threshold > 0.0) ||
      !(goal_tolerance > 0.0) || !(reveal_radius > 0.0) || !(robot_radius >= 0.0) || !(sensing_radius > 0.0) ||
      !(limits.v_max > 0.0) || !(limits.w_max > 0.0) || !(goal_distance_scale > 0.0)) {
    throw std::invalid_argument("sim config: parameters must be positive");
  }
  if (q < 8) throw std::invalid_argument("sim config: q must be at least 8");
}

std::size_t SimConfig::stuck_ticks() const {
  return static_cast<std::size_t>(std::llround(stuck_window / dt));
}

// ---------------------------------------------------------------------------
// Sensing

bool RevealState::update(const RobotState& s, const WorldModel& world, const SimConfig& config, double time) {
  bool changed = false;
  for (std::size_t i = 0; i < world.occluded_obstacles.size(); ++i) {
    if (revealed[i]) continue;
    const Disc& d = world.occluded_obstacles[i];
    if (std::hypot(d.x - s.x, d.y - s.y) - d.radius <= config.reveal_radius) {
      revealed[i] = true;
      reveal_time[i] = time;
      changed = true;
    }
  }
  return changed;
}

std::vector<Disc> visible_obstacles(const WorldModel& world, const RevealState& reveal) {
  std::vector<Disc> out = world.hard_obstacles;
  for (std::size_t i = 0; i < world.occluded_obstacles.size(); ++i) {
    if (i < reveal.revealed.size() && reveal.revealed[i]) out.push_back(world.occluded_obstacles[i]);
  }
  return out;
}

std::size_t terrain_bin(TerrainClass c, std::size_t q) {
  if (q >= 11) return 1 + static_cast<std::size_t>(c);
  switch (c) {
    case TerrainClass::kConcrete:
    case TerrainClass::kShortGrass: return 1;
    case TerrainClass::kGravel:
    case TerrainClass::kMediumRocks:
    case TerrainClass::kLargeRocks: return 2;
    case TerrainClass::kTallGrass: return 3;
    case TerrainClass::kForest: return 4;
  }
  return 1;
}

ObservationVector synthesize_observation(const RobotState& s, const WorldModel& world, const RevealState& reveal,
                                         const SimConfig& config) {
  const std::size_t q = config.q;
  if (q < 8) throw std::invalid_argument("observation: q must be at least 8");
  std::vector<double> f(q, 0.0);
  f[0] = 1.0;

  // Equal-area samples of the forward cone.
  std::size_t inside = 0;
  std::vector<double> counts(q, 0.0);
  for (std::size_t ring = 0; ring < kConeRings; ++ring) {
    const double r = config.sensing_radius * std::sqrt((static_cast<double>(ring) + 0.5) / kConeRings);
    for (std::size_t ray = 0; ray < kConeRays; ++ray) {
      const double a = -config.cone_half_angle +
                       (static_cast<double>(ray) + 0.5) * 2.0 * config.cone_half_angle / kConeRays;
      const double x = s.x + r * std::cos(s.heading + a);
      const double y = s.y + r * std::sin(s.heading + a);
      if (!world.in_bounds(x, y)) continue;
      ++inside;
      counts[terrain_bin(world.terrain_at(x, y), q)] += 1.0;
    }
  }
  const std::size_t bins = q >= 11 ? kTerrainClassCount : 4;
  if (inside > 0) {
    for (std::size_t b = 1; b <= bins; ++b) f[b] = counts[b] / static_cast<double>(inside);
  }

  double left = 0.0;
  double right = 0.0;
  for (const Disc& d : visible_obstacles(world, reveal)) {
    const double bearing = normalize_angle(std::atan2(d.y - s.y, d.x - s.x) - s.heading);
    if (std::abs(bearing) >= kPi / 2.0) continue;
    const double c = std::max(0.0, clearance(s, d, config.robot_radius));
    if (c >= config.sensing_radius) continue;
    const double p = std::exp(-c);
    double& side = bearing >= 0.0 ? left : right;
    side = std::max(side, p);
  }
  f[bins + 1] = left;
  f[bins + 2] = right;
  const double dist = std::hypot(world.goal.x - s.x, world.goal.y - s.y);
  f[bins + 3] = std::min(dist / config.goal_distance_scale, 1.0);
  return ObservationVector(std::move(f));
}

SensedEnvironment sense(const RobotState& s, const WorldModel& world, const RevealState& reveal,
                        const SimConfig& config, double time) {
  SensedEnvironment env;
  const double gx = world.goal.x - s.x;
  const double gy = world.goal.y - s.y;
  env.goal_distance = std::hypot(gx, gy);
  env.goal_bearing = env.goal_distance > 0.0 ? normalize_angle(std::atan2(gy, gx) - s.heading) : 0.0;
  for (const Disc& d : visible_obstacles(world, reveal)) {
    const double center = std::hypot(d.x - s.x, d.y - s.y);
    const double c = std::max(0.0, center - d.radius - config.robot_radius);
    if (c > config.sensing_radius) continue;
    env.obstacles.push_back(PolarObstacle{normalize_angle(std::atan2(d.y - s.y, d.x - s.x) - s.heading), c});
  }
  env.terrain_ruggedness = std::clamp(world.properties_at(s.x, s.y).ruggedness, 0.0, 1.0);
  env.time = time;
  return env;
}

bool in_contact(const RobotState& s, const WorldModel& world, const SimConfig& config) {
  auto touching = [&](const Disc& d) { return clearance(s, d, config.robot_radius) < 0.0; };
  return std::any_of(world.hard_obstacles.begin(), world.hard_obstacles.end(), touching) ||
         std::any_of(world.occluded_obstacles.begin(), world.occluded_obstacles.end(), touching);
}

Behavior apply_terrain_effects(const RobotState& s, const Behavior& a, const WorldModel& world,
                               const SimConfig& config, std::mt19937_64& rng) {
  const TerrainProperties& p = world.properties_at(s.x, s.y);
  double factor = p.traction;
  if (p.slip > 0.0) {
    std::uniform_real_distribution<double> noise(-p.slip, p.slip);
    factor += noise(rng);
  }
  Behavior out{a.linear * std::max(factor, 0.0), a.angular};
  if (out.linear == 0.0) return out;
  const RobotState next = step_kinematics(s, out, config.dt, config.integrator);
  auto blocks = [&](const Disc& d) {
    const double now = clearance(s, d, config.robot_radius);
    const double then = clearance(next, d, config.robot_radius);
    return then < 0.0 && then < now;
  };
  if (std::any_of(world.hard_obstacles.begin(), world.hard_obstacles.end(), blocks) ||
      std::any_of(world.occluded_obstacles.begin(), world.occluded_obstacles.end(), blocks)) {
    out.linear = 0.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Controllers

PolicyController::PolicyController(PolicyLibrary library, std::size_t index, std::uint64_t seed)
    : library_(std::move(library)), index_(index), seed_(seed) {
  library_.id(index_);
}

Behavior PolicyController::act(const ControlInput& input) {
  return library_.act(index_, input.state, input.environment, seed_);
}

std::vector<std::string> PolicyController::policy_columns() const {
  return {std::string(library_.id(index_).name())};
}

ControlAnnotation PolicyController::annotation() const {
  ControlAnnotation a;
  a.weights = {1.0};
  a.regrets = {std::numeric_limits<double>::quiet_NaN()};
  return a;
}

NautsController::NautsController(std::vector<PredictorParams> models, std::vector<std::string> names,
                                 NautsConfig config)
    : models_(std::move(models)), names_(std::move(names)), config_(config) {
  if (models_.empty()) throw std::invalid_argument("nauts controller: no prediction models");
  if (names_.size() != models_.size()) throw std::invalid_argument("nauts controller: one name per model required");
  if (config_.negotiation_period == 0) throw std::invalid_argument("nauts controller: negotiation period must be >= 1");
  const auto& arch = models_.front().arch;
  for (const auto& m : models_) {
    m.validate();
    if (m.arch.q != arch.q || m.arch.horizon != arch.horizon) {
      throw std::invalid_argument("nauts controller: models disagree on q or horizon");
    }
  }
  annotation_.weights.assign(models_.size(), 1.0 / static_cast<double>(models_.size()));
  annotation_.regrets.assign(models_.size(), std::numeric_limits<double>::quiet_NaN());
}

Behavior NautsController::act(const ControlInput& input) {
  std::vector<PolicyPrediction> predictions;
  predictions.reserve(models_.size());
  for (const auto& m : models_) predictions.push_back(predict(m, input.observation, input.goal));
  if (!have_v_) {
    v_ = uniform_weights(input.observation, models_.size());
    have_v_ = true;
  }
  annotation_.solver_iterations = 0;
  if (config_.negotiate && input.tick % config_.negotiation_period == 0) negotiate(input, predictions);
  BlendOptions blend = config_.blend;
  blend.dt = models_.front().arch.dt;
  const Trajectory traj = blend_behaviors(input.observation, v_, predictions, blend);
  const Eigen::VectorXd w = blend_weights(input.observation, v_);
  annotation_.weights.assign(w.data(), w.data() + w.size());
  return traj.behaviors.front();
}

void NautsController::negotiate(const ControlInput& input, const std::vector<PolicyPrediction>& predictions) {
  RegretVector regrets;
  try {
    regrets = compute_regrets(predictions, input.goal, config_.regret);
  } catch (const std::invalid_argument& e) {
    warnings_.push_back("tick " + std::to_string(input.tick) + ": regrets unavailable: " + e.what());
    return;
  }
  const WeightMatrix start = config_.warm_start ? v_ : uniform_weights(input.observation, models_.size());
  NegotiationRecord rec;
  rec.tick = input.tick;
  const auto t0 = std::chrono::steady_clock::now();
  SolveResult res;
  try {
    res = solve_negotiation(input.observation, regrets, start, config_.solver);
  } catch (const NumericError& e) {
    warnings_.push_back("tick " + std::to_string(input.tick) + ": negotiation failed, keeping V: " + e.what());
    return;
  }
  rec.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  rec.iterations = res.diagnostics.iterations;
  rec.converged = res.diagnostics.converged;
  rec.objective = res.objective();
  if (config_.record_cold_start) {
    rec.cold_iterations =
        solve_negotiation(input.observation, regrets, uniform_weights(input.observation, models_.size()),
                          config_.solver)
            .diagnostics.iterations;
  }
  if (config_.keep_instances) instances_.push_back(NegotiationInstance{input.observation, regrets, start});
  records_.push_back(rec);

  annotation_.solver_iterations = rec.iterations;
  annotation_.objective = rec.objective;
  const Eigen::VectorXd mean = regrets.per_policy.rowwise().mean();
  annotation_.regrets.assign(mean.data(), mean.data() + mean.size());
  // A stalled solve still lowered the objective from its start.
  if (res.diagnostics.status == SolveStatus::kMaxIterations) {
    warnings_.push_back("tick " + std::to_string(input.tick) + ": negotiation did not converge, keeping V");
    return;
  }
  v_ = res.v;
  last_regrets_ = std::move(regrets);
}

// ---------------------------------------------------------------------------
// Episodes

EpisodeResult run_episode(const WorldModel& world, const SimConfig& config, Controller& controller) {
  world.validate();
  config.validate();
  EpisodeResult out;
  out.trace.policy_names = controller.policy_columns();
  MetricsReport& m = out.metrics;

  std::mt19937_64 rng(mix(config.seed));
  RevealState reveal(world);
  RobotState s = world.start;
  const std::size_t stuck_ticks = std::max<std::size_t>(config.stuck_ticks(), 1);
  std::vector<Point> positions{{s.x, s.y}};
  bool was_blocked = false;

  for (std::size_t tick = 0;; ++tick) {
    const double time = static_cast<double>(tick) * config.dt;
    if (std::hypot(world.goal.x - s.x, world.goal.y - s.y) <= config.goal_tolerance) break;
    if (time >= config.timeout - 1e-9) {
      m.failure = true;
      m.cause = "timeout";
      break;
    }
    reveal.update(s, world, config, time);

    ControlInput in;
    in.tick = tick;
    in.time = time;
    in.state = s;
    in.observation = synthesize_observation(s, world, reveal, config);
    in.goal = to_body_frame(world.goal_from(s), s.heading);
    in.environment = sense(s, world, reveal, config, time);

    Behavior cmd;
    try {
      cmd = controller.act(in);
    } catch (const std::exception& e) {
      m.failure = true;
      m.cause = std::string("controller_error: ") + e.what();
      break;
    }
    cmd = config.limits.clamp(cmd);
    const Behavior eff = apply_terrain_effects(s, cmd, world, config, rng);
    const bool blocked = cmd.linear > 0.0 && eff.linear == 0.0;
    if (blocked && !was_blocked) ++m.contacts;
    was_blocked = blocked;
    const RobotState next = step_kinematics(s, eff, config.dt, config.integrator);

    TraceRow row;
    row.tick = tick;
    row.time = time;
    row.state = s;
    row.command = cmd;
    row.effective_linear = eff.linear;
    row.terrain = world.terrain_at(s.x, s.y);
    const ControlAnnotation ann = controller.annotation();
    row.weights = ann.weights;
    row.regrets = ann.regrets;
    row.objective = ann.objective;
    row.solver_iterations = ann.solver_iterations;
    row.weights.resize(out.trace.policy_names.size(), std::numeric_limits<double>::quiet_NaN());
    row.regrets.resize(out.trace.policy_names.size(), std::numeric_limits<double>::quiet_NaN());
    out.trace.rows.push_back(std::move(row));

    m.distance_traveled += std::hypot(next.x - s.x, next.y - s.y);
    s = next;
    m.ticks = tick + 1;
    positions.push_back({s.x, s.y});

    if (!world.in_bounds(s.x, s.y)) {
      m.failure = true;
      m.cause = "out_of_bounds";
      break;
    }
    if (positions.size() > stuck_ticks) {
      const Point& then = positions[positions.size() - 1 - stuck_ticks];
      if (std::hypot(s.x - then.x, s.y - then.y) < config.stuck_threshold) {
        m.failure = true;
        m.cause = "stuck";
        break;
      }
    }
  }
  m.traversal_time = static_cast<double>(m.ticks) * config.dt;
  m.adaptation_time =
      adaptation_time(out.trace, config.training_terrains, config.dt, config.adaptation_reference_window);
  return out;
}

std::optional<double> adaptation_time(const RunTrace& trace, const std::vector<TerrainClass>& training, double dt,
                                      double reference_window) {
  if (training.empty()) return std::nullopt;
  auto known = [&](TerrainClass c) { return std::find(training.begin(), training.end(), c) != training.end(); };
  std::size_t entry = trace.rows.size();
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    if (!known(trace.rows[i].terrain)) {
      entry = i;
      break;
    }
  }
  if (entry == trace.rows.size()) return std::nullopt;
  const auto window = static_cast<std::size_t>(std::llround(reference_window / dt));
  const std::size_t from = entry > window ? entry - window : 0;
  double ref = 0.0;
  for (std::size_t i = from; i < entry; ++i) ref += trace.rows[i].effective_linear;
  ref = entry > from ? ref / static_cast<double>(entry - from) : 0.0;
  for (std::size_t i = entry; i < trace.rows.size(); ++i) {
    if (trace.rows[i].effective_linear >= 0.5 * ref) {
      return static_cast<double>(i - entry) * dt;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Trace and metrics IO

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("trace line " + std::to_string(line) + ": bad number '" + s + "'");
  }
}

constexpr std::string_view kTraceMagic = "# nauts-trace";

}  // namespace

void RunTrace::write_csv(std::ostream& out) const {
  out << kTraceMagic << ",version=" << kTraceFormatVersion << ",policies=";
  for (std::size_t i = 0; i < policy_names.size(); ++i) out << (i ? ";" : "") << policy_names[i];
  out << '\n';
  out << "tick,time,x,y,heading,v,w,v_eff,terrain";
  for (const auto& n : policy_names) out << ",weight_" << n;
  for (const auto& n : policy_names) out << ",regret_" << n;
  out << ",objective,iterations\n";
  for (const auto& r : rows) {
    out << r.tick << ',' << fmt(r.time) << ',' << fmt(r.state.x) << ',' << fmt(r.state.y) << ','
        << fmt(r.state.heading) << ',' << fmt(r.command.linear) << ',' << fmt(r.command.angular) << ','
        << fmt(r.effective_linear) << ',' << terrain_name(r.terrain);
    for (double w : r.weights) out << ',' << fmt(w);
    for (double g : r.regrets) out << ',' << fmt(g);
    out << ',' << fmt(r.objective) << ',' << r.solver_iterations << '\n';
  }
}

RunTrace RunTrace::read_csv(std::istream& in) {
  RunTrace t;
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || line.rfind(kTraceMagic, 0) != 0) {
    throw std::runtime_error("trace line 1: missing '# nauts-trace' header");
  }
  const auto meta = split(line, ',');
  int version = -1;
  for (const auto& f : meta) {
    if (f.rfind("version=", 0) == 0) version = std::atoi(f.c_str() + 8);
    if (f.rfind("policies=", 0) == 0) {
      const std::string names = f.substr(9);
      if (!names.empty()) t.policy_names = split(names, ';');
    }
  }
  if (version != kTraceFormatVersion) {
    throw std::runtime_error("trace line 1: unsupported trace version " + std::to_string(version));
  }
  const std::size_t n = t.policy_names.size();
  const std::size_t columns = 9 + 2 * n + 2;
  ++lineno;
  if (!std::getline(in, line) || line.rfind("tick,", 0) != 0) {
    throw std::runtime_error("trace line 2: missing column header");
  }
  if (split(line, ',').size() != columns) throw std::runtime_error("trace line 2: column count mismatch");
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != columns) {
      throw std::runtime_error("trace line " + std::to_string(lineno) + ": expected " + std::to_string(columns) +
                               " fields, found " + std::to_string(f.size()));
    }
    TraceRow r;
    r.tick = static_cast<std::size_t>(parse_double(f[0], lineno));
    r.time = parse_double(f[1], lineno);
    r.state = RobotState{parse_double(f[2], lineno), parse_double(f[3], lineno), parse_double(f[4], lineno)};
    r.command = Behavior{parse_double(f[5], lineno), parse_double(f[6], lineno)};
    r.effective_linear = parse_double(f[7], lineno);
    try {
      r.terrain = terrain_from_name(f[8]);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("trace line " + std::to_string(lineno) + ": " + e.what());
    }
    for (std::size_t i = 0; i < n; ++i) r.weights.push_back(parse_double(f[9 + i], lineno));
    for (std::size_t i = 0; i < n; ++i) r.regrets.push_back(parse_double(f[9 + n + i], lineno));
    r.objective = parse_double(f[9 + 2 * n], lineno);
    r.solver_iterations = static_cast<std::size_t>(parse_double(f[10 + 2 * n], lineno));
    t.rows.push_back(std::move(r));
  }
  return t;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j;
  j["format"] = "nauts-metrics";
  j["version"] = 1;
  j["failure"] = failure;
  j["cause"] = cause;
  j["traversal_time"] = traversal_time;
  j["distance_traveled"] = distance_traveled;
  j["adaptation_time"] = adaptation_time ? nlohmann::json(*adaptation_time) : nlohmann::json(nullptr);
  j["ticks"] = ticks;
  j["contacts"] = contacts;
  return j;
}

}  // namespace nauts
