#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ombrl/envs.hpp"
#include "ombrl/gp_core.hpp"

namespace ombrl {

enum class LambdaMode { Theoretical, Fixed, Zero };

struct PlanConfig {
  int plan_horizon = 15;
  int population = 64;
  int elites = 8;
  int cem_iterations = 4;
  double init_action_std = 1.0;
  int mc_rollouts = 5;
  int replan_every = 1;
  LambdaMode lambda_mode = LambdaMode::Theoretical;
  double lambda_value = 0.0;  // used by LambdaMode::Fixed

  void validate() const;
};

/// Open-loop action sequence, one row per planning step.
struct ActionSequence {
  Matrix actions;  // plan_horizon x d_u

  Eigen::Index horizon() const { return actions.rows(); }
};

struct PlanResult {
  ActionSequence best_sequence;
  double predicted_return = 0.0;
  double predicted_uncertainty = 0.0;
  double objective_value = 0.0;
  double lambda = 0.0;
  /// Best objective seen after each CEM iteration.
  std::vector<double> best_per_iteration;
};

/// One-step dynamics used for planning. Rows of `inputs` are (x, u).
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;
  virtual Eigen::Index state_dim() const = 0;
  virtual void predict(const Matrix& inputs, Matrix& mean, Matrix* std) const = 0;
};

/// Maps raw (x, u) rows to GP inputs and next states to GP targets.
struct InputTransform {
  std::vector<int> angle_columns;  // each replaced in place by (cos, sin)
  Vector scale;                    // per transformed column; empty = 1
  bool residual = false;           // targets are x' - x

  Eigen::Index output_dim(Eigen::Index raw_dim) const;
  Matrix apply(const Matrix& raw) const;
  /// Transformed inputs and targets. An empty raw set yields an empty set of
  /// the right shape.
  Dataset model_dataset(const Dataset& raw, Eigen::Index raw_dim, Eigen::Index state_dim) const;
  void validate(Eigen::Index state_dim, Eigen::Index raw_dim) const;
};

/// Posterior-mean dynamics with epistemic std for a GP fit through `transform`.
class GpDynamics final : public DynamicsModel {
 public:
  explicit GpDynamics(const GpPosterior& post, InputTransform transform = {});
  Eigen::Index state_dim() const override { return post_.output_dim(); }
  void predict(const Matrix& inputs, Matrix& mean, Matrix* std) const override;

 private:
  const GpPosterior& post_;
  InputTransform transform_;
};

/// Known episode dynamics with zero epistemic uncertainty (oracle planning).
class TrueDynamics final : public DynamicsModel {
 public:
  TrueDynamics(const EnvSpec& spec, int episode_n) : spec_(spec), episode_(episode_n) {}
  Eigen::Index state_dim() const override { return spec_.state_dim; }
  void predict(const Matrix& inputs, Matrix& mean, Matrix* std) const override;

 private:
  const EnvSpec& spec_;
  int episode_;
};

using RewardFn = std::function<double(const Vector& x, const Vector& u, const Vector& x_next)>;

/// Common-random-number process noise for model rollouts: one
/// plan_horizon x d_x block per Monte Carlo rollout.
struct RolloutNoise {
  std::vector<Matrix> draws;

  static RolloutNoise sample(int mc_rollouts, int horizon, int state_dim, double noise_std,
                             std::uint64_t seed);
};

struct RolloutEstimate {
  double return_estimate = 0.0;
  double uncertainty_estimate = 0.0;
};

/// lambda_{n,m} = R_max T beta / sigma.
double lambda_weight(const CalibrationParams& params, double beta);

RolloutEstimate rollout_model(const DynamicsModel& model, const ActionSequence& seq,
                              const Vector& x0, const RewardFn& reward, const RolloutNoise& noise);
RolloutEstimate rollout_model(const GpPosterior& post, const ActionSequence& seq, const Vector& x0,
                              const RewardFn& reward, const RolloutNoise& noise);

/// Scores several sequences against the same noise draws in one batch.
std::vector<RolloutEstimate> evaluate_population(const DynamicsModel& model,
                                                 const std::vector<Matrix>& sequences,
                                                 const Vector& x0, const RewardFn& reward,
                                                 const RolloutNoise& noise);

/// argmax of return + lambda * uncertainty; lowest index wins ties.
std::size_t select_candidate(const std::vector<RolloutEstimate>& scores, double lambda);

struct PlanRequest {
  double lambda = 0.0;
  double action_bound = 1.0;
  int action_dim = 1;
  double noise_std = 0.0;  // process-noise std for the Monte Carlo rollouts
  std::uint64_t seed = 0;
  const Matrix* warm_start = nullptr;  // initial CEM mean, plan_horizon x d_u
};

/// Cross-entropy search over open-loop sequences for the optimistic objective.
PlanResult optimistic_plan(const DynamicsModel& model, const Vector& x0, const PlanConfig& cfg,
                           const RewardFn& reward, const PlanRequest& req);

struct PlanCache {
  std::optional<PlanResult> plan;
  int steps_since_replan = 0;
  int plans_made = 0;
};

/// Receding-horizon execution: replans every `replan_every` steps (warm
/// started from the shifted previous plan) and otherwise plays the cached
/// sequence. Output is clipped to +-action_bound.
Vector act(const DynamicsModel& model, const Vector& state, const PlanConfig& cfg,
           const RewardFn& reward, const PlanRequest& req, PlanCache& cache);

}  // namespace ombrl
