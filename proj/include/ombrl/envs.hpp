#pragma once

#include <cstdint>
#include <vector>

#include "ombrl/gp_core.hpp"
#include "ombrl/random.hpp"

namespace ombrl {

/// Episode-indexed exponential decay of an actuator parameter:
/// theta_n = exp(-a max(0, n - n_start)) (theta_max - theta_min) + theta_min.
struct DecaySchedule {
  double rate = 0.0;
  double theta_max = 1.0;
  double theta_min = 1.0;
  int start_episode = 0;

  void validate() const;
};

double decay_value(const DecaySchedule& s, int n);

enum class EnvKind { Pendulum, SynthRkhs };

/// How the episode's actuator limit acts on the commanded input.
/// Clip saturates at +-limit. Scale maps the nominal range [-theta_max,
/// theta_max] onto [-limit, limit] (an actuator-gain change).
enum class Actuation { Clip, Scale };

struct PendulumParams {
  double mass = 1.0;
  double length = 1.0;
  double gravity = 10.0;
  double dt = 0.05;
  double max_speed = 8.0;
};

/// Ground truth f_j(z) = sum_i c_ij(n) k(z, center_i) with
/// c(n) = base + max(0, n - n_start) * drift.
struct SynthRkhsParams {
  KernelSpec kernel;
  Matrix centers;             // k x (d_x + d_u)
  Matrix base_coefficients;   // k x d_x
  Matrix drift_coefficients;  // k x d_x, per-episode change after n_start
};

struct EnvSpec {
  EnvKind kind = EnvKind::Pendulum;
  int horizon_T = 200;
  int state_dim = 2;
  int action_dim = 1;
  double noise_std = 0.0;
  double reward_bound = 1.0;
  DecaySchedule schedule;
  Actuation actuation = Actuation::Clip;
  PendulumParams pendulum;
  SynthRkhsParams synth;

  static EnvSpec make_pendulum(const PendulumParams& params, const DecaySchedule& schedule,
                               int horizon_T, double noise_std, double reward_bound = 1.0);
  static EnvSpec make_synth_rkhs(SynthRkhsParams params, const DecaySchedule& schedule,
                                 int horizon_T, double noise_std, double reward_bound = 1.0);

  int input_dim() const { return state_dim + action_dim; }
  /// Bound of the action range an agent commands in: the episode-1 limit.
  double nominal_action_bound() const { return decay_value(schedule, 1); }

  void validate() const;
};

struct EnvState {
  Vector x;
  int t = 0;
  int episode = 1;
};

struct StepResult {
  EnvState next;
  double reward = 0.0;
};

EnvState env_reset(const EnvSpec& spec, int episode_n, std::uint64_t seed);

StepResult env_step(const EnvSpec& spec, const EnvState& s, const Vector& u, const Vector& noise);

/// Input actually applied at episode n for commanded input `u`.
Vector applied_action(const EnvSpec& spec, int episode_n, const Vector& u);

/// Noise-free dynamics f*_n at the rows of `inputs` (each row is (x, u) with
/// the commanded u). Used by the oracle planner.
Matrix true_dynamics(const EnvSpec& spec, int episode_n, const Matrix& inputs);

/// r(x, u, x') in [0, R_max] with `u` the applied input.
double env_reward(const EnvSpec& spec, const Vector& x, const Vector& u, const Vector& x_next);

/// Normalizer of the affine Pendulum cost-to-reward map.
double pendulum_cost_norm(const EnvSpec& spec);

/// Per-episode process-noise draws, shape T x d_x, one independent stream
/// per (seed, episode).
Matrix episode_noise(const EnvSpec& spec, int episode_n, std::uint64_t seed);

/// Synthetic-system coefficients c(n), k x d_x.
Matrix synth_coefficients(const EnvSpec& spec, int episode_n);

/// ||f*_{n+1} - f*_n|| summed over state dimensions. Exact RKHS norm for
/// SynthRkhs; a Lipschitz proxy for the Pendulum (see is_exact_drift).
double drift_increment(const EnvSpec& spec, int n);
bool is_exact_drift(const EnvSpec& spec);

class DriftTracker {
 public:
  void record(double increment);
  const std::vector<double>& increments() const { return increments_; }
  double budget() const { return total_; }

 private:
  std::vector<double> increments_;
  double total_ = 0.0;
};

/// Build a SynthRkhs ground truth with `centers` random centers in [-1, 1]^d,
/// base functions of RKHS norm `base_norm` and a per-episode drift of RKHS
/// norm `drift_norm` in every state dimension.
SynthRkhsParams random_synth_params(const KernelSpec& kernel, int state_dim, int action_dim,
                                    int centers, double base_norm, double drift_norm,
                                    std::uint64_t seed);

}  // namespace ombrl
