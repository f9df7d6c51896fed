#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ombrl/buffer.hpp"
#include "ombrl/config.hpp"

namespace ombrl {

struct EpisodeRecord {
  std::string method;
  std::uint64_t seed = 0;
  int episode = 1;
  double achieved_return = 0.0;
  double oracle_return = 0.0;
  int buffer_len = 0;  // n - m, in episodes
  double beta = 0.0;
  double lambda = 0.0;
  double gamma_estimate = 0.0;
  double drift_increment = 0.0;
  double actuator_limit = 0.0;
  double wall_time_ms = 0.0;
};

struct EpisodeOutcome {
  Trajectory trajectory;
  EpisodeRecord record;  // oracle_return left at 0
};

/// Model-side quantities for planning episode n from the given buffer.
struct EpisodeModelStats {
  int buffer_len = 0;
  double gamma = 0.0;
  double beta = 0.0;
  double lambda = 0.0;
};

/// gamma: realized information gain of the active data (the greedy estimate
/// over the buffer's own points). beta and lambda follow from it.
EpisodeModelStats episode_model_stats(const ExperimentConfig& config,
                                      const ForgettingPolicy& policy, const GpPosterior& post,
                                      int buffer_len, int episode_n);

/// Fit on the buffer's active data, plan and act for T steps on episode n's
/// true dynamics, then push the collected trajectory into `buffer`.
EpisodeOutcome run_episode(const ExperimentConfig& config, EpisodeBuffer& buffer, int episode_n,
                           std::uint64_t seed);

/// Return of the true-dynamics planner (lambda = 0, oracle budget) on
/// episode n with the same initial state and noise stream as the learner.
double oracle_episode_return(const ExperimentConfig& config, int episode_n, std::uint64_t seed);

/// Memoizes oracle_episode_return per (episode, seed).
class OracleCache {
 public:
  double get(const ExperimentConfig& config, int episode_n, std::uint64_t seed);
  std::size_t size() const { return values_.size(); }

 private:
  std::map<std::pair<int, std::uint64_t>, double> values_;
};

/// Mean oracle return over `seeds`.
double oracle_return(const ExperimentConfig& config, int episode_n,
                     const std::vector<std::uint64_t>& seeds, OracleCache* cache = nullptr);

struct RegretCurve {
  std::vector<double> raw;           // oracle - achieved, unclipped
  std::vector<double> instantaneous;  // clipped at 0
  std::vector<double> cumulative;

  double final_regret() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

/// Records must cover episodes 1..N exactly once (any order).
RegretCurve dynamic_regret(const std::vector<EpisodeRecord>& records);

struct BoundDiagnostics {
  int p = 1;
  double gamma_p = 0.0;
  double P_N = 0.0;
  double learning_term = 0.0;  // N sqrt(gamma_p^3 / p)
  double drift_term = 0.0;     // gamma_p p^{3/2} P_N
  double lambda_tilde = 0.0;
  double B_tilde = 0.0;

  double total() const { return learning_term + drift_term; }
};

BoundDiagnostics bound_terms(int p, double gamma_p, int N, double P_N);

/// Same, plus the optimism constants lambda~ and B~ for a buffer of p
/// episodes at episode N, with P_N as the drift accumulated inside it.
BoundDiagnostics bound_terms(int p, double gamma_p, int N, double P_N,
                             const CalibrationParams& params);

/// Uniform samples of the (x, u) domain, mapped through the model's input transform.
Matrix domain_candidates(const ExperimentConfig& config, int count, std::uint64_t seed);

/// Sum of drift increments over n = 1..N-1.
double variation_budget(const EnvSpec& env, int episodes);

/// Whether gamma_p counts the p * T points of p episodes or just p points.
enum class GammaIndex { Points, Episodes };

/// Bound diagnostics for p in [p_lo, p_hi] with the greedy gamma estimate
/// over `candidate_count` domain samples.
std::vector<BoundDiagnostics> diagnose(const ExperimentConfig& config, int p_lo, int p_hi,
                                       int candidate_count = 256,
                                       GammaIndex index = GammaIndex::Points);

struct RunResult {
  std::string method;
  std::uint64_t seed = 0;
  std::vector<EpisodeRecord> records;
  RegretCurve curve;
  int dominance_violations = 0;  // oracle below achieved by more than 2% of R_max T
};

struct MethodDiagnostics {
  std::string method;
  BoundDiagnostics bound;
  bool exact_drift = false;
};

struct ExperimentResult {
  std::vector<RunResult> runs;
  std::vector<MethodDiagnostics> diagnostics;
};

using ProgressFn = std::function<void(const EpisodeRecord&)>;

ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

/// Least-squares slope of y against x.
double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ombrl
