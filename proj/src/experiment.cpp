#include "nauts/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

namespace nauts {
namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

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

PolicyLibrary library_for(const std::vector<std::string>& names, const PolicyParams& params) {
  return names.empty() ? PolicyLibrary::standard(params) : PolicyLibrary::from_names(names, params);
}

std::vector<std::string> names_of(const PolicyLibrary& lib) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < lib.size(); ++i) out.emplace_back(lib.id(i).name());
  return out;
}

bool free_spot(const WorldModel& w, double x, double y, double margin) {
  auto clear = [&](const Disc& d) { return std::hypot(d.x - x, d.y - y) > d.radius + margin; };
  return std::all_of(w.hard_obstacles.begin(), w.hard_obstacles.end(), clear) &&
         std::all_of(w.occluded_obstacles.begin(), w.occluded_obstacles.end(), clear);
}

Point draw_point(const WorldModel& w, std::mt19937_64& rng, double margin, double clearance) {
  std::uniform_real_distribution<double> ux(margin, w.extent_x() - margin);
  std::uniform_real_distribution<double> uy(margin, w.extent_y() - margin);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const Point p{ux(rng), uy(rng)};
    if (free_spot(w, p.x, p.y, clearance)) return p;
  }
  throw ConfigError("could not find a free spot in the world");
}

Point draw_goal(const WorldModel& w, const RobotState& s, std::mt19937_64& rng, double min_distance) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const Point g = draw_point(w, rng, 1.0, 0.5);
    if (std::hypot(g.x - s.x, g.y - s.y) >= min_distance) return g;
  }
  return draw_point(w, rng, 1.0, 0.5);
}

// Goal beyond a random obstacle, roughly on the line through it, so that the
// straight path runs into the obstacle.
std::optional<Point> goal_behind_obstacle(const WorldModel& w, const RobotState& s, std::mt19937_64& rng,
                                          double min_distance) {
  std::vector<Disc> all = w.hard_obstacles;
  all.insert(all.end(), w.occluded_obstacles.begin(), w.occluded_obstacles.end());
  if (all.empty()) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
  std::uniform_real_distribution<double> beyond(1.5, 6.0);
  std::uniform_real_distribution<double> lateral(-0.3, 0.3);
  for (int attempt = 0; attempt < 50; ++attempt) {
    const Disc& d = all[pick(rng)];
    const double dx = d.x - s.x;
    const double dy = d.y - s.y;
    const double n = std::hypot(dx, dy);
    if (n < 1.0 || n > 12.0) continue;
    const double b = beyond(rng);
    const double l = lateral(rng);
    const Point g{d.x + (dx * b - dy * l) / n, d.y + (dy * b + dx * l) / n};
    if (g.x < 1.0 || g.y < 1.0 || g.x > w.extent_x() - 1.0 || g.y > w.extent_y() - 1.0) continue;
    if (!free_spot(w, g.x, g.y, 0.5) || std::hypot(g.x - s.x, g.y - s.y) < min_distance) continue;
    return g;
  }
  return std::nullopt;
}

// Pose close to a random obstacle and facing it.
std::optional<RobotState> start_near_obstacle(const WorldModel& w, std::mt19937_64& rng, double robot_radius) {
  std::vector<Disc> all = w.hard_obstacles;
  all.insert(all.end(), w.occluded_obstacles.begin(), w.occluded_obstacles.end());
  if (all.empty()) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::uniform_real_distribution<double> gap(0.05, 1.0);
  std::uniform_real_distribution<double> off(-0.6, 0.6);
  for (int attempt = 0; attempt < 50; ++attempt) {
    const Disc& d = all[pick(rng)];
    const double a = angle(rng);
    const double r = d.radius + robot_radius + gap(rng);
    const double x = d.x + r * std::cos(a);
    const double y = d.y + r * std::sin(a);
    if (x < 1.0 || y < 1.0 || x > w.extent_x() - 1.0 || y > w.extent_y() - 1.0) continue;
    if (!free_spot(w, x, y, robot_radius + 0.05)) continue;
    return RobotState::make(x, y, a + kPi + off(rng));
  }
  return std::nullopt;
}

Point next_goal(const WorldModel& w, const RobotState& s, std::mt19937_64& rng, const GenDataConfig& cfg) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) < cfg.obstacle_goal_fraction) {
    if (const auto g = goal_behind_obstacle(w, s, rng, cfg.min_goal_distance)) return *g;
  }
  return draw_goal(w, s, rng, cfg.min_goal_distance);
}

// One gen-data rollout of a single policy.
TrainingSamples rollout(const Scenario& sc, const PolicyLibrary& lib, std::size_t policy, std::size_t episode,
                        const GenDataConfig& cfg) {
  const std::uint64_t seed = mix(cfg.seed ^ mix(policy * 1000003ULL + episode));
  WorldModel world = sc.instantiate(seed);
  SimConfig sim = sc.sim;
  sim.seed = seed;
  std::mt19937_64 rng(mix(seed + 17));
  std::mt19937_64 slip(mix(seed + 29));
  std::uniform_real_distribution<double> heading(-kPi, kPi);

  const Point start = draw_point(world, rng, 1.0, sim.robot_radius + 0.2);
  RobotState s = RobotState::make(start.x, start.y, heading(rng));
  if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < cfg.near_obstacle_start_fraction) {
    if (const auto near = start_near_obstacle(world, rng, sim.robot_radius)) s = *near;
  }
  world.start = s;
  world.goal = next_goal(world, s, rng, cfg);
  RevealState reveal(world);

  std::vector<RobotState> states{s};
  std::vector<Behavior> commands;
  std::vector<ObservationVector> observations;
  const std::size_t stuck = std::max<std::size_t>(sim.stuck_ticks(), 1);

  for (std::size_t tick = 0; tick < cfg.ticks; ++tick) {
    const double time = static_cast<double>(tick) * sim.dt;
    if (std::hypot(world.goal.x - s.x, world.goal.y - s.y) <= sim.goal_tolerance) {
      world.goal = next_goal(world, s, rng, cfg);
    }
    reveal.update(s, world, sim, time);
    observations.push_back(synthesize_observation(s, world, reveal, sim));
    const SensedEnvironment env = sense(s, world, reveal, sim, time);
    const Behavior cmd = sim.limits.clamp(lib.act(policy, s, env, seed));
    const Behavior eff = apply_terrain_effects(s, cmd, world, sim, slip);
    const RobotState next = step_kinematics(s, eff, sim.dt, sim.integrator);
    commands.push_back(cmd);
    s = next;
    states.push_back(s);
    if (!world.in_bounds(s.x, s.y)) break;
    if (states.size() > stuck) {
      const RobotState& then = states[states.size() - 1 - stuck];
      if (std::hypot(s.x - then.x, s.y - then.y) < sim.stuck_threshold) break;
    }
  }
  return window_samples(states, commands, observations, cfg.horizon);
}

constexpr std::string_view kDatasetMagic = "# nauts-dataset";

}  // namespace

TrainingSamples window_samples(const std::vector<RobotState>& states, const std::vector<Behavior>& commands,
                               const std::vector<ObservationVector>& observations, std::size_t horizon) {
  if (states.size() != commands.size() + 1 || observations.size() != commands.size()) {
    throw std::invalid_argument("window_samples: inconsistent run lengths");
  }
  TrainingSamples out;
  if (horizon == 0 || commands.size() < horizon) return out;
  for (std::size_t t = 0; t + horizon <= commands.size(); ++t) {
    const RobotState& s0 = states[t];
    TrainingSample sample;
    sample.observation = observations[t];
    for (std::size_t k = 0; k <= horizon; ++k) {
      const RobotState& sk = states[t + k];
      const Goal rel = to_body_frame(relative_displacement(s0, sk), s0.heading);
      sample.actual_states.push_back(RobotState::make(rel.dx, rel.dy, sk.heading - s0.heading));
    }
    sample.actual_behaviors.assign(commands.begin() + static_cast<std::ptrdiff_t>(t),
                                   commands.begin() + static_cast<std::ptrdiff_t>(t + horizon));
    const RobotState& end = sample.actual_states.back();
    sample.goal = Goal{end.x, end.y};
    out.push_back(std::move(sample));
  }
  return out;
}

Dataset generate_dataset(const Scenario& sc, const GenDataConfig& cfg) {
  if (cfg.horizon == 0) throw ConfigError("gen-data: horizon must be >= 1");
  const PolicyLibrary lib = library_for(cfg.policies, sc.policy);
  Dataset d;
  d.q = sc.sim.q;
  d.horizon = cfg.horizon;
  d.dt = sc.sim.dt;
  d.policies = names_of(lib);
  d.samples.resize(lib.size());
  for (std::size_t p = 0; p < lib.size(); ++p) {
    for (std::size_t e = 0; e < cfg.episodes; ++e) {
      auto s = rollout(sc, lib, p, e, cfg);
      d.samples[p].insert(d.samples[p].end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
    }
  }
  return d;
}

void write_dataset(std::ostream& out, const Dataset& d) {
  const std::size_t T = d.horizon;
  out << kDatasetMagic << ",version=" << kDatasetFormatVersion << ",q=" << d.q << ",horizon=" << T
      << ",dt=" << fmt(d.dt) << '\n';
  out << "policy,index";
  for (std::size_t i = 0; i < d.q; ++i) out << ",o" << i;
  out << ",goal_dx,goal_dy";
  for (std::size_t k = 0; k < T; ++k) out << ",a" << k << "_v,a" << k << "_w";
  for (std::size_t k = 0; k <= T; ++k) out << ",s" << k << "_x,s" << k << "_y,s" << k << "_h";
  out << '\n';
  for (std::size_t p = 0; p < d.policies.size(); ++p) {
    for (std::size_t n = 0; n < d.samples[p].size(); ++n) {
      const TrainingSample& s = d.samples[p][n];
      out << d.policies[p] << ',' << n;
      for (double f : s.observation.features()) out << ',' << fmt(f);
      out << ',' << fmt(s.goal.dx) << ',' << fmt(s.goal.dy);
      for (const auto& a : s.actual_behaviors) out << ',' << fmt(a.linear) << ',' << fmt(a.angular);
      for (const auto& st : s.actual_states) out << ',' << fmt(st.x) << ',' << fmt(st.y) << ',' << fmt(st.heading);
      out << '\n';
    }
  }
}

void write_dataset(const std::filesystem::path& path, const Dataset& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset " + path.string());
  write_dataset(out, d);
  if (!out) throw IoError("failed writing dataset " + path.string());
}

Dataset read_dataset(std::istream& in, const std::string& origin) {
  auto fail = [&](std::size_t line, const std::string& what) {
    throw IoError(origin + ":" + std::to_string(line) + ": " + what);
  };
  std::string line;
  if (!std::getline(in, line) || line.rfind(kDatasetMagic, 0) != 0) fail(1, "missing '# nauts-dataset' header");
  Dataset d;
  int version = -1;
  for (const auto& f : split(line, ',')) {
    const auto eq = f.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = f.substr(0, eq);
    const std::string val = f.substr(eq + 1);
    if (key == "version") version = std::atoi(val.c_str());
    if (key == "q") d.q = std::stoul(val);
    if (key == "horizon") d.horizon = std::stoul(val);
    if (key == "dt") d.dt = std::stod(val);
  }
  if (version != kDatasetFormatVersion) fail(1, "unsupported dataset version " + std::to_string(version));
  const std::size_t T = d.horizon;
  const std::size_t cols = 2 + d.q + 2 + 2 * T + 3 * (T + 1);
  if (!std::getline(in, line) || split(line, ',').size() != cols) fail(2, "column header does not match q/horizon");
  std::map<std::string, std::size_t> index;
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != cols) fail(lineno, "expected " + std::to_string(cols) + " fields, found " + std::to_string(f.size()));
    std::vector<double> v(cols - 2);
    for (std::size_t i = 2; i < cols; ++i) {
      try {
        std::size_t used = 0;
        v[i - 2] = std::stod(f[i], &used);
        if (used != f[i].size()) throw std::invalid_argument(f[i]);
      } catch (const std::exception&) {
        fail(lineno, "bad number '" + f[i] + "'");
      }
    }
    auto it = index.find(f[0]);
    if (it == index.end()) {
      it = index.emplace(f[0], d.policies.size()).first;
      d.policies.push_back(f[0]);
      d.samples.emplace_back();
    }
    TrainingSample s;
    try {
      s.observation = ObservationVector(std::vector<double>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(d.q)));
    } catch (const std::invalid_argument& e) {
      fail(lineno, e.what());
    }
    std::size_t c = d.q;
    s.goal = Goal{v[c], v[c + 1]};
    c += 2;
    for (std::size_t k = 0; k < T; ++k, c += 2) s.actual_behaviors.push_back(Behavior{v[c], v[c + 1]});
    for (std::size_t k = 0; k <= T; ++k, c += 3) s.actual_states.push_back(RobotState{v[c], v[c + 1], v[c + 2]});
    d.samples[it->second].push_back(std::move(s));
  }
  return d;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path.string());
  return read_dataset(in, path.string());
}

// ---------------------------------------------------------------------------

std::filesystem::path model_path(const std::filesystem::path& dir, const std::string& policy) {
  return dir / ("model_" + policy + ".json");
}

TrainOutputs train_models(const Dataset& dataset, const PredictorArch& arch_in, const TrainConfig& config,
                          const std::filesystem::path& out_dir, bool parallel) {
  PredictorArch arch = arch_in;
  arch.q = dataset.q;
  arch.horizon = dataset.horizon;
  arch.dt = dataset.dt;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  TrainOutputs out;
  out.results = train_all(dataset.samples, arch, config, parallel);
  for (std::size_t p = 0; p < dataset.policies.size(); ++p) {
    const auto path = model_path(out_dir, dataset.policies[p]);
    try {
      save_model(path, out.results[p].params, dataset.policies[p]);
    } catch (const std::runtime_error& e) {
      throw IoError(e.what());
    }
    out.model_files.push_back(path);
  }
  out.loss_curve = out_dir / "loss_curve.csv";
  std::ofstream csv(out.loss_curve, std::ios::binary);
  if (!csv) throw IoError("cannot write " + out.loss_curve.string());
  csv << "# nauts-loss-curve,version=1\n";
  csv << "policy,iteration,total,likelihood_term,goal_term,variance_clamped\n";
  for (std::size_t p = 0; p < dataset.policies.size(); ++p) {
    const auto& curve = out.results[p].loss_curve;
    for (std::size_t i = 0; i < curve.size(); ++i) {
      csv << dataset.policies[p] << ',' << out.results[p].curve_iterations[i] << ',' << fmt(curve[i].total) << ',' << fmt(curve[i].likelihood_term)
          << ',' << fmt(curve[i].goal_term) << ',' << (curve[i].variance_clamped ? 1 : 0) << '\n';
    }
  }
  if (!csv) throw IoError("failed writing " + out.loss_curve.string());
  return out;
}

// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const {
  if (!(lambda1 > 0.0) || !(lambda2 >= 0.0) || !(lambda3 > 0.0) || !(lambda4 > 0.0)) {
    throw ConfigError("lambda1, lambda3, lambda4 must be positive and lambda2 non-negative");
  }
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (negotiation_period < 1) throw ConfigError("negotiation period must be >= 1");
  if (mode != ControllerMode::kSinglePolicy && models.empty()) {
    throw ConfigError(mode_label() + " mode needs trained models (--models)");
  }
}

std::string ExperimentConfig::mode_label() const {
  switch (mode) {
    case ControllerMode::kNauts: return "nauts";
    case ControllerMode::kUniformBlend: return "uniform_blend";
    case ControllerMode::kSinglePolicy: return "single_policy(" + single_policy + ")";
  }
  return "unknown";
}

ControllerMode parse_mode(const std::string& text, std::string* policy) {
  if (text == "nauts") return ControllerMode::kNauts;
  if (text == "uniform_blend") return ControllerMode::kUniformBlend;
  if (text == "single_policy") return ControllerMode::kSinglePolicy;
  const std::string prefix = "single_policy(";
  if (text.rfind(prefix, 0) == 0 && text.size() > prefix.size() + 1 && text.back() == ')') {
    const std::string name = text.substr(prefix.size(), text.size() - prefix.size() - 1);
    policy_kind_from_name(name);
    if (policy) *policy = name;
    return ControllerMode::kSinglePolicy;
  }
  throw ConfigError("unknown mode '" + text + "' (nauts, uniform_blend, single_policy(<name>))");
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) { return mix(seed * 7919ULL + trial); }

namespace {

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string opt(const std::optional<double>& v, int precision) {
  if (!v) return "n/a";
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(precision) << *v;
  return ss.str();
}

TrialResult run_one(const Scenario& sc, const ExperimentConfig& cfg, const std::vector<PredictorParams>& models,
                    const std::vector<std::string>& names, std::size_t trial) {
  TrialResult r;
  r.trial = trial;
  r.seed = trial_seed(cfg.seed, trial);
  const WorldModel world = sc.instantiate(r.seed);
  SimConfig sim = sc.sim;
  sim.seed = r.seed;
  EpisodeResult ep;
  if (cfg.mode == ControllerMode::kSinglePolicy) {
    const PolicyLibrary lib = library_for(cfg.policies, sc.policy);
    const std::size_t index = lib.find(policy_kind_from_name(cfg.single_policy));
    if (index == lib.size()) throw ConfigError("policy '" + cfg.single_policy + "' is not in the library");
    PolicyController ctl(lib, index, r.seed);
    ep = run_episode(world, sim, ctl);
  } else {
    NautsConfig nc;
    nc.solver.lambda3 = cfg.lambda3;
    nc.solver.lambda4 = cfg.lambda4;
    nc.negotiation_period = cfg.negotiation_period;
    nc.negotiate = cfg.mode == ControllerMode::kNauts;
    nc.blend.limits = sim.limits;
    NautsController ctl(models, names, nc);
    ep = run_episode(world, sim, ctl);
    r.negotiations = ctl.negotiations();
  }
  r.metrics = std::move(ep.metrics);
  r.trace = std::move(ep.trace);
  return r;
}

void write_trials_csv(std::ostream& out, const std::vector<TrialResult>& trials) {
  out << "# nauts-trials,version=1\n";
  out << "trial,seed,failure,cause,traversal_time,distance_traveled,adaptation_time,contacts\n";
  for (const auto& t : trials) {
    out << t.trial << ',' << t.seed << ',' << (t.metrics.failure ? 1 : 0) << ',' << t.metrics.cause << ','
        << fmt(t.metrics.traversal_time) << ',' << fmt(t.metrics.distance_traveled) << ','
        << (t.metrics.adaptation_time ? fmt(*t.metrics.adaptation_time) : "nan") << ',' << t.metrics.contacts << '\n';
  }
}

template <typename F>
void write_file(const std::filesystem::path& path, F&& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  body(out);
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

MetricsTable summarize(const std::vector<TrialResult>& trials, const std::string& mode, const std::string& scenario) {
  MetricsTable t;
  t.mode = mode;
  t.scenario = scenario;
  t.trials = trials.size();
  std::vector<double> tt, dt, at;
  for (const auto& r : trials) {
    if (r.metrics.failure) {
      ++t.failures;
    } else {
      tt.push_back(r.metrics.traversal_time);
      dt.push_back(r.metrics.distance_traveled);
    }
    if (r.metrics.adaptation_time) at.push_back(*r.metrics.adaptation_time);
  }
  t.traversal_time = mean_of(tt);
  t.distance_traveled = mean_of(dt);
  t.adaptation_time = mean_of(at);
  return t;
}

void MetricsTable::write_csv(std::ostream& out) const {
  out << "# nauts-metrics-table,version=1\n";
  out << "scenario,mode,trials,FR,TT,DT,AT\n";
  out << scenario << ',' << mode << ',' << trials << ',' << failures << ',' << opt(traversal_time, 6) << ','
      << opt(distance_traveled, 6) << ',' << opt(adaptation_time, 6) << '\n';
}

void MetricsTable::write_text(std::ostream& out) const {
  out << "scenario: " << scenario << "\nmode:     " << mode << '\n';
  out << std::left << std::setw(12) << "FR (/" + std::to_string(trials) + ")" << std::setw(10) << "TT (s)"
      << std::setw(10) << "DT (m)" << "AT (s)\n";
  out << std::left << std::setw(12) << failures << std::setw(10) << opt(traversal_time, 2) << std::setw(10)
      << opt(distance_traveled, 2) << opt(adaptation_time, 2) << '\n';
}

RunOutputs run_trials(const Scenario& sc, const ExperimentConfig& cfg, const std::vector<PredictorParams>& models) {
  std::vector<std::string> names = names_of(library_for(cfg.policies, sc.policy));
  if (cfg.mode != ControllerMode::kSinglePolicy && models.size() != names.size()) {
    throw ConfigError("expected " + std::to_string(names.size()) + " models, got " + std::to_string(models.size()));
  }
  RunOutputs out;
  if (cfg.parallel && cfg.trials > 1) {
    std::vector<std::future<TrialResult>> jobs;
    for (std::size_t k = 0; k < cfg.trials; ++k) {
      jobs.push_back(std::async(std::launch::async, [&, k] { return run_one(sc, cfg, models, names, k); }));
    }
    for (auto& j : jobs) out.trials.push_back(j.get());
  } else {
    for (std::size_t k = 0; k < cfg.trials; ++k) out.trials.push_back(run_one(sc, cfg, models, names, k));
  }
  out.table = summarize(out.trials, cfg.mode_label(), sc.name);
  return out;
}

RunOutputs run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  Scenario sc;
  try {
    sc = load_scenario(cfg.scenario);
  } catch (const std::runtime_error& e) {
    throw IoError(e.what());
  }
  std::vector<PredictorParams> models;
  if (cfg.mode != ControllerMode::kSinglePolicy) {
    for (const auto& name : names_of(library_for(cfg.policies, sc.policy))) {
      const auto path = model_path(cfg.models, name);
      if (!std::filesystem::exists(path)) throw ConfigError("missing model for policy '" + name + "': " + path.string());
      try {
        models.push_back(load_model(path));
      } catch (const std::runtime_error& e) {
        throw IoError(e.what());
      }
      if (models.back().arch.horizon != cfg.horizon) {
        throw ConfigError("model " + path.string() + " has horizon " + std::to_string(models.back().arch.horizon) +
                          ", experiment uses " + std::to_string(cfg.horizon));
      }
    }
  }
  RunOutputs out = run_trials(sc, cfg, models);
  if (!cfg.out.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (ec) throw IoError("cannot create " + cfg.out.string() + ": " + ec.message());
    for (const auto& t : out.trials) {
      write_file(cfg.out / ("trace_" + std::to_string(t.trial) + ".csv"), [&](std::ostream& o) { t.trace.write_csv(o); });
      write_file(cfg.out / ("metrics_" + std::to_string(t.trial) + ".json"),
                 [&](std::ostream& o) { o << t.metrics.to_json().dump(2) << '\n'; });
    }
    write_file(cfg.out / "trials.csv", [&](std::ostream& o) { write_trials_csv(o, out.trials); });
    write_file(cfg.out / "table.csv", [&](std::ostream& o) { out.table.write_csv(o); });
    write_file(cfg.out / "table.txt", [&](std::ostream& o) { out.table.write_text(o); });
  }
  return out;
}

// ---------------------------------------------------------------------------

void write_importance(std::ostream& out, const std::vector<std::filesystem::path>& paths) {
  std::vector<RunTrace> traces;
  std::vector<std::string> columns;
  for (const auto& p : paths) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open trace " + p.string());
    try {
      traces.push_back(RunTrace::read_csv(in));
    } catch (const std::runtime_error& e) {
      throw IoError(p.string() + ": " + e.what());
    }
    for (const auto& n : traces.back().policy_names) {
      if (std::find(columns.begin(), columns.end(), n) == columns.end()) columns.push_back(n);
    }
  }
  out << "# nauts-importance,version=1\n";
  out << "trace,tick,time";
  for (const auto& c : columns) out << ',' << c;
  out << '\n';
  for (std::size_t t = 0; t < traces.size(); ++t) {
    const RunTrace& tr = traces[t];
    std::vector<std::size_t> slot;
    for (const auto& n : tr.policy_names) {
      slot.push_back(static_cast<std::size_t>(std::find(columns.begin(), columns.end(), n) - columns.begin()));
    }
    for (const auto& row : tr.rows) {
      std::vector<double> vals(columns.size(), 0.0);
      double sum = 0.0;
      for (double w : row.weights) sum += w;
      for (std::size_t i = 0; i < row.weights.size(); ++i) {
        vals[slot[i]] = sum != 0.0 ? row.weights[i] / sum : std::numeric_limits<double>::quiet_NaN();
      }
      out << paths[t].filename().string() << ',' << row.tick << ',' << fmt(row.time);
      for (double v : vals) out << ',' << fmt(v);
      out << '\n';
    }
  }
}

}  // namespace nauts
