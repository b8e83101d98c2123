#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "nauts/simulator.hpp"

namespace nauts {
namespace {

Disc disc_from(const YAML::Node& n) {
  if (!n.IsSequence() || n.size() != 3) throw std::invalid_argument("obstacle must be [x, y, radius]");
  return Disc{n[0].as<double>(), n[1].as<double>(), n[2].as<double>()};
}

template <typename T>
void read_opt(const YAML::Node& parent, const char* key, T& out) {
  if (const auto n = parent[key]) out = n.as<T>();
}

void read_world(const YAML::Node& w, Scenario& sc) {
  const auto width = w["width"].as<std::size_t>();
  const auto height = w["height"].as<std::size_t>();
  const double cell = w["cell_size"] ? w["cell_size"].as<double>() : 0.5;
  const TerrainClass fill = terrain_from_name(w["fill"] ? w["fill"].as<std::string>() : "concrete");
  WorldModel world = WorldModel::uniform(width, height, cell, fill);
  if (const auto regions = w["regions"]) {
    for (const auto& r : regions) {
      const auto rect = r["rect"];
      if (!rect.IsSequence() || rect.size() != 4) throw std::invalid_argument("region rect must be [x0, y0, x1, y1]");
      world.fill_rect(rect[0].as<double>(), rect[1].as<double>(), rect[2].as<double>(), rect[3].as<double>(),
                      terrain_from_name(r["terrain"].as<std::string>()));
    }
  }
  if (const auto hard = w["hard_obstacles"]) {
    for (const auto& d : hard) world.hard_obstacles.push_back(disc_from(d));
  }
  if (const auto occ = w["occluded_obstacles"]) {
    for (const auto& d : occ) world.occluded_obstacles.push_back(disc_from(d));
  }
  const auto start = w["start"];
  if (!start.IsSequence() || start.size() != 3) throw std::invalid_argument("start must be [x, y, heading]");
  world.start = RobotState::make(start[0].as<double>(), start[1].as<double>(), start[2].as<double>());
  const auto goal = w["goal"];
  if (!goal.IsSequence() || goal.size() != 2) throw std::invalid_argument("goal must be [x, y]");
  world.goal = Point{goal[0].as<double>(), goal[1].as<double>()};
  sc.world = std::move(world);
}

void read_terrain(const YAML::Node& t, TerrainTable& table) {
  for (const auto& kv : t) {
    auto& p = table[static_cast<std::size_t>(terrain_from_name(kv.first.as<std::string>()))];
    read_opt(kv.second, "ruggedness", p.ruggedness);
    read_opt(kv.second, "traction", p.traction);
    read_opt(kv.second, "slip", p.slip);
  }
}

void read_sim(const YAML::Node& s, SimConfig& c) {
  read_opt(s, "dt", c.dt);
  read_opt(s, "v_max", c.limits.v_max);
  read_opt(s, "w_max", c.limits.w_max);
  read_opt(s, "timeout", c.timeout);
  read_opt(s, "stuck_window", c.stuck_window);
  read_opt(s, "stuck_threshold", c.stuck_threshold);
  read_opt(s, "goal_tolerance", c.goal_tolerance);
  read_opt(s, "reveal_radius", c.reveal_radius);
  read_opt(s, "robot_radius", c.robot_radius);
  read_opt(s, "sensing_radius", c.sensing_radius);
  read_opt(s, "goal_distance_scale", c.goal_distance_scale);
  read_opt(s, "q", c.q);
  read_opt(s, "seed", c.seed);
  if (const auto integ = s["integrator"]) {
    const auto name = integ.as<std::string>();
    if (name == "exact_arc") c.integrator = Integrator::kExactArc;
    else if (name == "euler") c.integrator = Integrator::kEuler;
    else throw std::invalid_argument("unknown integrator '" + name + "'");
  }
  if (const auto tt = s["training_terrains"]) {
    for (const auto& n : tt) c.training_terrains.push_back(terrain_from_name(n.as<std::string>()));
  }
}

void read_policy(const YAML::Node& p, PolicyParams& pp) {
  read_opt(p, "goal_gain", pp.goal_gain);
  read_opt(p, "cruise_speed", pp.cruise_speed);
  read_opt(p, "repulse_gain", pp.repulse_gain);
  read_opt(p, "slow_distance", pp.slow_distance);
  read_opt(p, "contact_distance", pp.contact_distance);
  read_opt(p, "slow_half_angle", pp.slow_half_angle);
  read_opt(p, "min_repulse_distance", pp.min_repulse_distance);
  read_opt(p, "min_steer_speed", pp.min_steer_speed);
  read_opt(p, "min_steer_cap", pp.min_steer_cap);
  read_opt(p, "lookahead", pp.lookahead);
  read_opt(p, "min_steer_gain", pp.min_steer_gain);
  read_opt(p, "ruggedness_slowdown", pp.ruggedness_slowdown);
  read_opt(p, "resample_period", pp.resample_period);
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  Scenario sc;
  try {
    const YAML::Node root = YAML::Load(text);
    if (!root.IsMap() || root["format"].as<std::string>("") != "nauts-scenario") {
      throw std::invalid_argument("not a scenario file (format: nauts-scenario expected)");
    }
    const int version = root["version"].as<int>(-1);
    if (version != kScenarioFormatVersion) {
      throw std::invalid_argument("unsupported scenario version " + std::to_string(version));
    }
    sc.name = root["name"].as<std::string>("scenario");
    if (!root["world"]) throw std::invalid_argument("missing 'world' section");
    read_world(root["world"], sc);
    if (const auto t = root["terrain"]) read_terrain(t, sc.world.terrain);
    if (const auto s = root["sim"]) read_sim(s, sc.sim);
    sc.policy.limits = sc.sim.limits;
    if (const auto p = root["policy"]) read_policy(p, sc.policy);
    if (const auto t = root["trials"]) {
      read_opt(t, "obstacle_jitter", sc.obstacle_jitter);
      read_opt(t, "start_jitter", sc.start_jitter);
    }
    sc.world.validate();
    sc.sim.validate();
  } catch (const YAML::Exception& e) {
    throw std::runtime_error(origin + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(origin + ": " + e.what());
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.string());
}

WorldModel Scenario::instantiate(std::uint64_t seed) const {
  WorldModel w = world;
  std::mt19937_64 rng(mix(seed ^ 0x5ce7a210ULL));
  if (obstacle_jitter > 0.0) {
    std::uniform_real_distribution<double> j(-obstacle_jitter, obstacle_jitter);
    auto shift = [&](Disc& d, bool hard) {
      const Disc moved{d.x + j(rng), d.y + j(rng), d.radius};
      const bool covers_goal = std::hypot(w.goal.x - moved.x, w.goal.y - moved.y) <= moved.radius;
      if (w.in_bounds(moved.x, moved.y) && !(hard && covers_goal)) d = moved;
    };
    for (auto& d : w.hard_obstacles) shift(d, true);
    for (auto& d : w.occluded_obstacles) shift(d, false);
  }
  if (start_jitter > 0.0) {
    std::uniform_real_distribution<double> j(-start_jitter, start_jitter);
    const double y = std::clamp(w.start.y + j(rng), 0.0, w.extent_y());
    w.start = RobotState::make(w.start.x, y, w.start.heading);
  }
  return w;
}

}  // namespace nauts
