#include "ombrl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "ombrl/random.hpp"

namespace ombrl {

namespace {

constexpr std::uint64_t kOracleTag = 0x0AC1E;

RewardFn planning_reward(const EnvSpec& env) {
  return [&env](const Vector& x, const Vector& u, const Vector& x_next) {
    return env_reward(env, x, u, x_next);
  };
}

struct Rollout {
  Trajectory trajectory;
  double total_reward = 0.0;
};

// Executes T steps of `model`-based receding-horizon control on the true
// episode-n system. Planner seeds depend on (seed, episode, step, tag) only.
Rollout execute(const ExperimentConfig& config, const DynamicsModel& model, const PlanConfig& cfg,
                double lambda, int episode_n, std::uint64_t seed, std::uint64_t tag) {
  const EnvSpec& env = config.env;
  const RewardFn reward = planning_reward(env);
  const Matrix noise = episode_noise(env, episode_n, seed);
  EnvState state = env_reset(env, episode_n, seed);

  PlanRequest req;
  req.lambda = lambda;
  req.action_bound = env.nominal_action_bound();
  req.action_dim = env.action_dim;
  req.noise_std = env.noise_std;

  Rollout out;
  out.trajectory.episode_index = episode_n;
  out.trajectory.transitions.reserve(static_cast<std::size_t>(env.horizon_T));
  PlanCache cache;
  for (int t = 0; t < env.horizon_T; ++t) {
    req.seed = derive_seed(seed, {tag, static_cast<std::uint64_t>(episode_n),
                                  static_cast<std::uint64_t>(t)});
    const Vector u = act(model, state.x, cfg, reward, req, cache);
    const StepResult step = env_step(env, state, u, noise.row(t).transpose());
    out.trajectory.transitions.push_back({state.x, u, step.next.x, t});
    out.total_reward += step.reward;
    state = step.next;
  }
  return out;
}

}  // namespace

EpisodeModelStats episode_model_stats(const ExperimentConfig& config,
                                      const ForgettingPolicy& policy, const GpPosterior& post,
                                      int buffer_len, int episode_n) {
  const CalibrationParams params = config.calibration_for(policy);
  EpisodeModelStats s;
  s.buffer_len = buffer_len;
  s.gamma = std::max(0.0, post.information_gain());
  s.beta = beta_width(params, buffer_len, s.gamma, episode_n);
  switch (config.planner.lambda_mode) {
    case LambdaMode::Theoretical:
      s.lambda = lambda_weight(params, s.beta);
      break;
    case LambdaMode::Fixed:
      s.lambda = config.planner.lambda_value;
      break;
    case LambdaMode::Zero:
      s.lambda = 0.0;
      break;
  }
  return s;
}

EpisodeOutcome run_episode(const ExperimentConfig& config, EpisodeBuffer& buffer, int episode_n,
                           std::uint64_t seed) {
  if (buffer.current_episode() != episode_n)
    throw std::invalid_argument("run_episode: buffer expects episode " +
                                std::to_string(buffer.current_episode()));
  const auto start = std::chrono::steady_clock::now();

  const Dataset data = config.model_inputs.model_dataset(
      buffer.active_dataset(), config.env.input_dim(), config.env.state_dim);
  std::optional<GpPosterior> post;
  try {
    post.emplace(config.kernel, data, config.calibration.noise_std * config.calibration.noise_std);
  } catch (const std::exception& e) {
    throw std::runtime_error("episode " + std::to_string(episode_n) + " (" +
                             buffer.policy().name() + ", seed " + std::to_string(seed) +
                             "): " + e.what());
  }
  const EpisodeModelStats stats =
      episode_model_stats(config, buffer.policy(), *post, buffer.buffer_len(), episode_n);

  const GpDynamics model(*post, config.model_inputs);
  Rollout rollout = execute(config, model, config.planner, stats.lambda, episode_n, seed,
                            static_cast<std::uint64_t>(Stream::Planner));

  EpisodeOutcome out;
  out.record.method = buffer.policy().name();
  out.record.seed = seed;
  out.record.episode = episode_n;
  out.record.achieved_return = rollout.total_reward;
  out.record.buffer_len = stats.buffer_len;
  out.record.beta = stats.beta;
  out.record.lambda = stats.lambda;
  out.record.gamma_estimate = stats.gamma;
  out.record.drift_increment = drift_increment(config.env, episode_n);
  out.record.actuator_limit = decay_value(config.env.schedule, episode_n);
  if (config.record_wall_time) {
    out.record.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
  }
  buffer.push_trajectory(rollout.trajectory);
  out.trajectory = std::move(rollout.trajectory);
  return out;
}

double oracle_episode_return(const ExperimentConfig& config, int episode_n, std::uint64_t seed) {
  const TrueDynamics model(config.env, episode_n);
  return execute(config, model, config.oracle_plan_config(), 0.0, episode_n, seed, kOracleTag)
      .total_reward;
}

double OracleCache::get(const ExperimentConfig& config, int episode_n, std::uint64_t seed) {
  const auto key = std::make_pair(episode_n, seed);
  const auto it = values_.find(key);
  if (it != values_.end()) return it->second;
  const double v = oracle_episode_return(config, episode_n, seed);
  values_.emplace(key, v);
  return v;
}

double oracle_return(const ExperimentConfig& config, int episode_n,
                     const std::vector<std::uint64_t>& seeds, OracleCache* cache) {
  if (seeds.empty()) throw std::invalid_argument("oracle_return: no seeds");
  double total = 0.0;
  for (const auto s : seeds)
    total += cache ? cache->get(config, episode_n, s) : oracle_episode_return(config, episode_n, s);
  return total / static_cast<double>(seeds.size());
}

RegretCurve dynamic_regret(const std::vector<EpisodeRecord>& records) {
  std::vector<const EpisodeRecord*> by_episode(records.size(), nullptr);
  for (const auto& r : records) {
    if (r.episode < 1 || r.episode > static_cast<int>(records.size()) ||
        by_episode[static_cast<std::size_t>(r.episode - 1)] != nullptr)
      throw std::invalid_argument("dynamic_regret: records must cover episodes 1..N once");
    by_episode[static_cast<std::size_t>(r.episode - 1)] = &r;
  }
  RegretCurve curve;
  double total = 0.0;
  for (const auto* r : by_episode) {
    const double raw = r->oracle_return - r->achieved_return;
    const double clipped = std::max(0.0, raw);
    total += clipped;
    curve.raw.push_back(raw);
    curve.instantaneous.push_back(clipped);
    curve.cumulative.push_back(total);
  }
  return curve;
}

BoundDiagnostics bound_terms(int p, double gamma_p, int N, double P_N) {
  if (p < 1 || gamma_p < 0.0 || N < 0 || P_N < 0.0)
    throw std::invalid_argument("bound_terms: inputs must be nonnegative and p >= 1");
  BoundDiagnostics d;
  d.p = p;
  d.gamma_p = gamma_p;
  d.P_N = P_N;
  d.learning_term = N * std::sqrt(gamma_p * gamma_p * gamma_p / p);
  d.drift_term = gamma_p * std::pow(static_cast<double>(p), 1.5) * P_N;
  return d;
}

BoundDiagnostics bound_terms(int p, double gamma_p, int N, double P_N,
                             const CalibrationParams& params) {
  BoundDiagnostics d = bound_terms(p, gamma_p, N, P_N);
  const double scale = std::max(params.reward_bound, params.kernel_bound) * params.horizon_T /
                       params.noise_std;
  d.lambda_tilde = scale * beta_width(params, p, gamma_p, std::max(1, N));
  d.B_tilde = xi_coefficient(params, p, gamma_p) * scale * params.horizon_T * P_N;
  return d;
}

Matrix domain_candidates(const ExperimentConfig& config, int count, std::uint64_t seed) {
  const EnvSpec& env = config.env;
  Rng rng = make_rng(seed, Stream::Candidates, {});
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Vector half_width = Vector::Ones(env.input_dim());
  if (env.kind == EnvKind::Pendulum) {
    half_width << std::numbers::pi, env.pendulum.max_speed, env.nominal_action_bound();
  } else {
    half_width.tail(env.action_dim).setConstant(env.nominal_action_bound());
  }
  Matrix out(count, env.input_dim());
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = half_width(j) * unif(rng);
  return config.model_inputs.apply(out);
}

double variation_budget(const EnvSpec& env, int episodes) {
  DriftTracker tracker;
  for (int n = 1; n < episodes; ++n) tracker.record(drift_increment(env, n));
  return tracker.budget();
}

std::vector<BoundDiagnostics> diagnose(const ExperimentConfig& config, int p_lo, int p_hi,
                                       int candidate_count, GammaIndex index) {
  if (p_lo < 1 || p_hi < p_lo) throw std::invalid_argument("diagnose: need 1 <= p_lo <= p_hi");
  const int T = index == GammaIndex::Points ? config.env.horizon_T : 1;
  const Matrix candidates = domain_candidates(config, candidate_count, 0);
  const double noise_var = config.calibration.noise_std * config.calibration.noise_std;
  const std::vector<double> gains = greedy_info_gain(config.kernel, candidates, p_hi * T, noise_var);
  const double P_N = variation_budget(config.env, config.episodes);
  const CalibrationParams params = config.calibration_for(ForgettingPolicy::reset(1));
  std::vector<BoundDiagnostics> out;
  for (int p = p_lo; p <= p_hi; ++p) {
    out.push_back(bound_terms(p, gains[static_cast<std::size_t>(p * T - 1)], config.episodes, P_N,
                              params));
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
  config.validate();
  ExperimentResult result;
  OracleCache oracle;
  const double tolerance = 0.02 * config.env.reward_bound * config.env.horizon_T;

  for (const auto& policy : config.methods) {
    for (const auto seed : config.seeds) {
      RunResult run;
      run.method = policy.name();
      run.seed = seed;
      EpisodeBuffer buffer(policy);
      for (int n = 1; n <= config.episodes; ++n) {
        EpisodeOutcome outcome = run_episode(config, buffer, n, seed);
        outcome.record.oracle_return = oracle.get(config, n, seed);
        if (outcome.record.achieved_return - outcome.record.oracle_return > tolerance)
          ++run.dominance_violations;
        if (progress) progress(outcome.record);
        run.records.push_back(std::move(outcome.record));
      }
      run.curve = dynamic_regret(run.records);
      result.runs.push_back(std::move(run));
    }

    MethodDiagnostics diag;
    diag.method = policy.name();
    diag.exact_drift = is_exact_drift(config.env);
    const int p = policy.kind == ForgettingPolicy::Kind::None
                      ? config.episodes
                      : std::min(policy.size, config.episodes);
    const Matrix candidates = domain_candidates(config, 256, 0);
    const auto gains = greedy_info_gain(config.kernel, candidates, p * config.env.horizon_T,
                                        config.calibration.noise_std * config.calibration.noise_std);
    diag.bound = bound_terms(p, gains.back(), config.episodes,
                             variation_budget(config.env, config.episodes),
                             config.calibration_for(policy));
    result.diagnostics.push_back(diag);
  }
  return result;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("least_squares_slope: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("least_squares_slope: degenerate x");
  return sxy / sxx;
}

}  // namespace ombrl
