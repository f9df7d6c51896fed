#include "ombrl/config.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace ombrl {

namespace pt = boost::property_tree;

ConfigError::ConfigError(std::vector<std::string> issues)
    : std::runtime_error([&] {
        std::string msg = "invalid config:";
        for (const auto& i : issues) msg += "\n  - " + i;
        return msg;
      }()),
      issues_(std::move(issues)) {}

CalibrationParams ExperimentConfig::calibration_for(const ForgettingPolicy& policy) const {
  CalibrationParams p = calibration;
  p.state_dim = env.state_dim;
  p.horizon_T = env.horizon_T;
  p.reward_bound = env.reward_bound;
  p.kernel_bound = kernel.prior_variance;
  p.mode = policy.kind == ForgettingPolicy::Kind::Window ? CalibrationMode::SlidingWindow
                                                         : CalibrationMode::Reset;
  return p;
}

PlanConfig ExperimentConfig::oracle_plan_config() const {
  PlanConfig cfg = planner;
  cfg.population = oracle.population;
  cfg.cem_iterations = oracle.cem_iterations;
  cfg.plan_horizon = oracle.plan_horizon;
  cfg.elites = std::max(1, planner.elites * oracle.population / std::max(1, planner.population));
  cfg.lambda_mode = LambdaMode::Zero;
  cfg.lambda_value = 0.0;
  return cfg;
}

void ExperimentConfig::validate() const {
  std::vector<std::string> issues;
  auto check = [&](bool ok, const std::string& field, const std::string& why) {
    if (!ok) issues.push_back(field + ": " + why);
  };
  auto guarded = [&](const std::string& field, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      issues.push_back(field + ": " + e.what());
    }
  };
  guarded("env", [&] { env.validate(); });
  guarded("kernel", [&] { kernel.validate(); });
  guarded("calibration", [&] { calibration_for(ForgettingPolicy::none()).validate(); });
  guarded("planner", [&] { planner.validate(); });
  guarded("kernel", [&] { model_inputs.validate(env.state_dim, env.input_dim()); });
  check(calibration.noise_std > 0.0, "calibration.noise_std", "must be > 0 (GP noise level)");
  check(planner.plan_horizon <= env.horizon_T, "planner.plan_horizon", "must be <= env.horizon");
  check(reset_period >= 1, "forgetting.reset_period", "must be >= 1");
  check(window_size >= 1, "forgetting.window_size", "must be >= 1");
  check(!methods.empty(), "forgetting.methods", "at least one method required");
  check(episodes >= 1, "experiment.episodes", "must be >= 1");
  check(!seeds.empty(), "experiment.seeds", "at least one seed required");
  check(oracle.population >= 4 * planner.population, "experiment.oracle_population",
        "must be >= 4x planner.population");
  check(oracle.cem_iterations >= 4 * planner.cem_iterations, "experiment.oracle_iterations",
        "must be >= 4x planner.iterations");
  check(oracle.plan_horizon >= 1 && oracle.plan_horizon <= env.horizon_T,
        "experiment.oracle_horizon", "must be in [1, env.horizon]");
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

std::vector<ForgettingPolicy> parse_methods(const std::string& spec, int reset_period,
                                            int window_size) {
  std::vector<std::string> parts;
  boost::split(parts, spec, boost::is_any_of(","));
  std::vector<ForgettingPolicy> out;
  for (auto part : parts) {
    boost::trim(part);
    if (part == "all") {
      out.push_back(ForgettingPolicy::none());
      out.push_back(ForgettingPolicy::reset(reset_period));
      out.push_back(ForgettingPolicy::window(window_size));
    } else if (part == "none") {
      out.push_back(ForgettingPolicy::none());
    } else if (part == "reset") {
      out.push_back(ForgettingPolicy::reset(reset_period));
    } else if (part == "window") {
      out.push_back(ForgettingPolicy::window(window_size));
    } else {
      throw std::invalid_argument("unknown method '" + part + "'");
    }
  }
  return out;
}

namespace {

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  template <typename T>
  T get(const std::string& section, const std::string& key, T fallback) {
    known_[section].insert(key);
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return fallback;
    const auto value = sec->get_optional<std::string>(key);
    if (!value) return fallback;
    try {
      return boost::lexical_cast<T>(boost::trim_copy(*value));
    } catch (const boost::bad_lexical_cast&) {
      issues_.push_back(section + "." + key + ": cannot parse '" + *value + "'");
      return fallback;
    }
  }

  std::string text(const std::string& section, const std::string& key, std::string fallback) {
    return boost::trim_copy(get<std::string>(section, key, std::move(fallback)));
  }

  std::vector<double> list(const std::string& section, const std::string& key) {
    const std::string raw = text(section, key, "");
    std::vector<double> out;
    if (raw.empty()) return out;
    std::vector<std::string> parts;
    boost::split(parts, raw, boost::is_any_of(","));
    for (auto& p : parts) {
      try {
        out.push_back(boost::lexical_cast<double>(boost::trim_copy(p)));
      } catch (const boost::bad_lexical_cast&) {
        issues_.push_back(section + "." + key + ": cannot parse '" + p + "'");
      }
    }
    return out;
  }

  std::vector<std::string> finish() {
    for (const auto& [section, body] : tree_) {
      const auto it = known_.find(section);
      if (it == known_.end()) {
        issues_.push_back("unknown section [" + section + "]");
        continue;
      }
      for (const auto& [key, value] : body) {
        (void)value;
        if (!it->second.count(key)) issues_.push_back("unknown key " + section + "." + key);
      }
    }
    return issues_;
  }

 private:
  const pt::ptree& tree_;
  std::map<std::string, std::set<std::string>> known_;
  std::vector<std::string> issues_;
};

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& name) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError({std::string("syntax: ") + e.what()});
  }
  Reader r(tree);
  ExperimentConfig cfg;
  cfg.name = name;

  // [env]
  const std::string kind = r.text("env", "kind", "pendulum");
  DecaySchedule schedule;
  schedule.rate = r.get<double>("env", "decay_rate", 0.0);
  schedule.theta_max = r.get<double>("env", "theta_max", 5.0);
  schedule.theta_min = r.get<double>("env", "theta_min", 1.0);
  schedule.start_episode = r.get<int>("env", "decay_start", 5);
  const int horizon = r.get<int>("env", "horizon", 200);
  const double env_noise = r.get<double>("env", "noise_std", 0.0);
  const double reward_bound = r.get<double>("env", "reward_bound", 1.0);
  const std::string actuation = r.text("env", "actuation", "clip");
  PendulumParams pend;
  pend.mass = r.get<double>("env", "mass", pend.mass);
  pend.length = r.get<double>("env", "length", pend.length);
  pend.gravity = r.get<double>("env", "gravity", pend.gravity);
  pend.dt = r.get<double>("env", "dt", pend.dt);
  pend.max_speed = r.get<double>("env", "max_speed", pend.max_speed);
  const int synth_dx = r.get<int>("env", "synth_state_dim", 1);
  const int synth_du = r.get<int>("env", "synth_action_dim", 1);
  const int synth_centers = r.get<int>("env", "synth_centers", 8);
  const double synth_ls = r.get<double>("env", "synth_lengthscale", 0.5);
  const double synth_var = r.get<double>("env", "synth_prior_variance", 1.0);
  const double synth_base = r.get<double>("env", "synth_base_norm", 0.5);
  const double synth_drift = r.get<double>("env", "synth_drift_norm", 0.0);
  const auto synth_seed = r.get<std::uint64_t>("env", "synth_seed", 0);

  // [kernel]
  const std::string kkind = r.text("kernel", "kind", "se");
  const double lengthscale = r.get<double>("kernel", "lengthscale", 1.0);
  const double prior_variance = r.get<double>("kernel", "prior_variance", 1.0);
  const std::vector<double> scale = r.list("kernel", "input_scale");
  const std::vector<double> angles = r.list("kernel", "angle_columns");
  const std::string residual = r.text("kernel", "residual_targets", "false");

  // [calibration]
  cfg.calibration.rkhs_bound = r.get<double>("calibration", "rkhs_bound", 1.0);
  cfg.calibration.noise_std = r.get<double>("calibration", "noise_std", 0.1);
  cfg.calibration.confidence = r.get<double>("calibration", "delta", 0.1);

  // [planner]
  auto& pc = cfg.planner;
  pc.plan_horizon = r.get<int>("planner", "plan_horizon", pc.plan_horizon);
  pc.population = r.get<int>("planner", "population", pc.population);
  pc.elites = r.get<int>("planner", "elites", pc.elites);
  pc.cem_iterations = r.get<int>("planner", "iterations", pc.cem_iterations);
  pc.init_action_std = r.get<double>("planner", "init_action_std", pc.init_action_std);
  pc.mc_rollouts = r.get<int>("planner", "mc_rollouts", pc.mc_rollouts);
  pc.replan_every = r.get<int>("planner", "replan_every", pc.replan_every);
  const std::string lmode = r.text("planner", "lambda_mode", "theoretical");
  pc.lambda_value = r.get<double>("planner", "lambda", 0.0);

  // [forgetting]
  cfg.reset_period = r.get<int>("forgetting", "reset_period", 20);
  cfg.window_size = r.get<int>("forgetting", "window_size", 20);
  const std::string methods = r.text("forgetting", "methods", "all");

  // [experiment]
  cfg.episodes = r.get<int>("experiment", "episodes", 1);
  const std::vector<double> seeds = r.list("experiment", "seeds");
  cfg.oracle.population = r.get<int>("experiment", "oracle_population", 4 * pc.population);
  cfg.oracle.cem_iterations =
      r.get<int>("experiment", "oracle_iterations", 4 * pc.cem_iterations);
  cfg.oracle.plan_horizon = r.get<int>("experiment", "oracle_horizon", pc.plan_horizon);
  cfg.output_dir = r.text("experiment", "output_dir", "out/" + name);
  const std::string wall = r.text("experiment", "record_wall_time", "false");

  std::vector<std::string> issues = r.finish();

  if (lmode == "theoretical") {
    pc.lambda_mode = LambdaMode::Theoretical;
  } else if (lmode == "fixed") {
    pc.lambda_mode = LambdaMode::Fixed;
  } else if (lmode == "zero") {
    pc.lambda_mode = LambdaMode::Zero;
  } else {
    issues.push_back("planner.lambda_mode: expected theoretical|fixed|zero, got '" + lmode + "'");
  }

  if (kkind == "se") {
    cfg.kernel = {KernelKind::SquaredExponential, lengthscale, prior_variance};
  } else if (kkind == "linear") {
    cfg.kernel = {KernelKind::Linear, 1.0, prior_variance};
  } else {
    issues.push_back("kernel.kind: expected se|linear, got '" + kkind + "'");
  }

  try {
    if (kind == "pendulum") {
      cfg.env = EnvSpec::make_pendulum(pend, schedule, horizon, env_noise, reward_bound);
    } else if (kind == "synth_rkhs") {
      KernelSpec truth{KernelKind::SquaredExponential, synth_ls, synth_var};
      cfg.env = EnvSpec::make_synth_rkhs(
          random_synth_params(truth, synth_dx, synth_du, synth_centers, synth_base, synth_drift,
                              synth_seed),
          schedule, horizon, env_noise, reward_bound);
    } else {
      issues.push_back("env.kind: expected pendulum|synth_rkhs, got '" + kind + "'");
    }
  } catch (const std::exception& e) {
    issues.push_back(std::string("env: ") + e.what());
  }
  if (actuation == "clip") {
    cfg.env.actuation = Actuation::Clip;
  } else if (actuation == "scale") {
    cfg.env.actuation = Actuation::Scale;
  } else {
    issues.push_back("env.actuation: expected clip|scale, got '" + actuation + "'");
  }

  if (residual == "true" || residual == "1") {
    cfg.model_inputs.residual = true;
  } else if (residual != "false" && residual != "0") {
    issues.push_back("kernel.residual_targets: expected true|false, got '" + residual + "'");
  }
  if (wall == "true" || wall == "1") {
    cfg.record_wall_time = true;
  } else if (wall != "false" && wall != "0") {
    issues.push_back("experiment.record_wall_time: expected true|false, got '" + wall + "'");
  }

  if (!scale.empty())
    cfg.model_inputs.scale =
        Eigen::Map<const Vector>(scale.data(), static_cast<Eigen::Index>(scale.size()));
  for (double a : angles) cfg.model_inputs.angle_columns.push_back(static_cast<int>(a));

  try {
    cfg.methods = parse_methods(methods, std::max(1, cfg.reset_period),
                                std::max(1, cfg.window_size));
  } catch (const std::exception& e) {
    issues.push_back(std::string("forgetting.methods: ") + e.what());
  }
  if (!seeds.empty()) {
    cfg.seeds.clear();
    for (double s : seeds) {
      if (s < 0 || s != static_cast<double>(static_cast<std::uint64_t>(s))) {
        issues.push_back("experiment.seeds: seeds must be nonnegative integers");
        break;
      }
      cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    }
  }

  // Fields that failed to parse keep their defaults, so validation still
  // reports every remaining problem.
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    issues.insert(issues.end(), e.issues().begin(), e.issues().end());
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return cfg;
}

std::string resolve_config_path(const std::string& path_or_name) {
  namespace fs = std::filesystem;
  if (fs::is_regular_file(path_or_name)) return path_or_name;
  std::vector<fs::path> dirs;
  if (const char* env = std::getenv("OMBRL_CONFIG_DIR")) dirs.emplace_back(env);
  dirs.emplace_back(OMBRL_CONFIG_DIR);
  for (const auto& dir : dirs) {
    for (const auto& candidate : {dir / path_or_name, dir / (path_or_name + ".ini")}) {
      if (fs::is_regular_file(candidate)) return candidate.string();
    }
  }
  throw ConfigError({"config '" + path_or_name + "' not found (file or bundled name)"});
}

ExperimentConfig load_config(const std::string& path_or_name) {
  const std::string path = resolve_config_path(path_or_name);
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config '" + path + "'"});
  return parse_config(in, std::filesystem::path(path).stem().string());
}

}  // namespace ombrl
