#include "ombrl/planner.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ombrl/random.hpp"

namespace ombrl {

void PlanConfig::validate() const {
  std::vector<std::string> bad;
  if (plan_horizon < 1) bad.emplace_back("plan_horizon");
  if (population < 1) bad.emplace_back("population");
  if (elites < 1 || elites > population) bad.emplace_back("elites");
  if (cem_iterations < 1) bad.emplace_back("cem_iterations");
  if (!(init_action_std > 0.0)) bad.emplace_back("init_action_std");
  if (mc_rollouts < 1) bad.emplace_back("mc_rollouts");
  if (replan_every < 1) bad.emplace_back("replan_every");
  if (lambda_mode == LambdaMode::Fixed && !(lambda_value >= 0.0)) bad.emplace_back("lambda");
  if (!bad.empty()) {
    std::string msg = "invalid planner config:";
    for (const auto& b : bad) msg += " " + b;
    throw std::invalid_argument(msg);
  }
}

Eigen::Index InputTransform::output_dim(Eigen::Index raw_dim) const {
  return raw_dim + static_cast<Eigen::Index>(angle_columns.size());
}

Matrix InputTransform::apply(const Matrix& raw) const {
  Matrix out;
  if (angle_columns.empty()) {
    out = raw;
  } else {
    out.resize(raw.rows(), output_dim(raw.cols()));
    Eigen::Index c = 0;
    for (Eigen::Index j = 0; j < raw.cols(); ++j) {
      if (std::find(angle_columns.begin(), angle_columns.end(), j) != angle_columns.end()) {
        out.col(c++) = raw.col(j).array().cos();
        out.col(c++) = raw.col(j).array().sin();
      } else {
        out.col(c++) = raw.col(j);
      }
    }
  }
  if (scale.size() != 0) out = out * scale.asDiagonal();
  return out;
}

Dataset InputTransform::model_dataset(const Dataset& raw, Eigen::Index raw_dim,
                                      Eigen::Index state_dim) const {
  Dataset out(output_dim(raw_dim), state_dim);
  if (raw.empty()) return out;
  out.inputs = apply(raw.inputs);
  out.targets = raw.targets;
  if (residual) out.targets -= raw.inputs.leftCols(state_dim);
  out.episode_tags = raw.episode_tags;
  return out;
}

void InputTransform::validate(Eigen::Index state_dim, Eigen::Index raw_dim) const {
  for (std::size_t i = 0; i < angle_columns.size(); ++i) {
    if (angle_columns[i] < 0 || angle_columns[i] >= state_dim)
      throw std::invalid_argument("angle columns must index state dimensions");
    for (std::size_t k = 0; k < i; ++k)
      if (angle_columns[k] == angle_columns[i])
        throw std::invalid_argument("angle columns must be distinct");
  }
  if (scale.size() != 0 && scale.size() != output_dim(raw_dim))
    throw std::invalid_argument("scale needs one entry per transformed input column");
  if (scale.size() != 0 && !(scale.array() > 0.0).all())
    throw std::invalid_argument("scale entries must be > 0");
}

GpDynamics::GpDynamics(const GpPosterior& post, InputTransform transform)
    : post_(post), transform_(std::move(transform)) {}

void GpDynamics::predict(const Matrix& inputs, Matrix& mean, Matrix* std) const {
  post_.predict_batch(transform_.apply(inputs), mean, std);
  if (transform_.residual) mean += inputs.leftCols(mean.cols());
}

void TrueDynamics::predict(const Matrix& inputs, Matrix& mean, Matrix* std) const {
  mean = true_dynamics(spec_, episode_, inputs);
  if (std) std->setZero(inputs.rows(), spec_.state_dim);
}

RolloutNoise RolloutNoise::sample(int mc_rollouts, int horizon, int state_dim, double noise_std,
                                  std::uint64_t seed) {
  RolloutNoise out;
  out.draws.assign(static_cast<std::size_t>(mc_rollouts), Matrix::Zero(horizon, state_dim));
  if (noise_std == 0.0) return out;
  Rng rng = make_rng(seed, Stream::RolloutNoise, {});
  std::normal_distribution<double> normal(0.0, noise_std);
  for (auto& m : out.draws)
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return out;
}

double lambda_weight(const CalibrationParams& params, double beta) {
  if (params.noise_std == 0.0) throw std::domain_error("lambda_weight: undefined for sigma == 0");
  if (beta < 0.0) throw std::invalid_argument("lambda_weight: beta must be >= 0");
  return params.reward_bound * params.horizon_T * beta / params.noise_std;
}

std::vector<RolloutEstimate> evaluate_population(const DynamicsModel& model,
                                                 const std::vector<Matrix>& sequences,
                                                 const Vector& x0, const RewardFn& reward,
                                                 const RolloutNoise& noise) {
  const auto count = static_cast<Eigen::Index>(sequences.size());
  std::vector<RolloutEstimate> out(sequences.size());
  if (count == 0) return out;
  const Eigen::Index dx = x0.size();
  if (model.state_dim() != dx) throw std::invalid_argument("rollout: state dimension mismatch");
  const Eigen::Index horizon = sequences.front().rows();
  const Eigen::Index du = sequences.front().cols();
  const auto mc = static_cast<Eigen::Index>(noise.draws.size());
  if (mc < 1) throw std::invalid_argument("rollout: at least one noise draw required");

  // All (rollout, candidate) pairs advance together; row r * count + i.
  const Eigen::Index rows = mc * count;
  Matrix x = x0.transpose().replicate(rows, 1);
  Matrix z(rows, dx + du);
  Matrix mean;
  Matrix std;
  std::vector<double> ret(static_cast<std::size_t>(rows), 0.0);
  std::vector<double> unc(static_cast<std::size_t>(rows), 0.0);
  for (Eigen::Index t = 0; t < horizon; ++t) {
    z.leftCols(dx) = x;
    for (Eigen::Index r = 0; r < mc; ++r)
      for (Eigen::Index i = 0; i < count; ++i)
        z.row(r * count + i).tail(du) = sequences[static_cast<std::size_t>(i)].row(t);
    model.predict(z, mean, &std);
    for (Eigen::Index r = 0; r < mc; ++r) {
      const auto w = noise.draws[static_cast<std::size_t>(r)].row(t);
      for (Eigen::Index i = 0; i < count; ++i) {
        const Eigen::Index k = r * count + i;
        const Vector next = mean.row(k).transpose() + w.transpose();
        unc[static_cast<std::size_t>(k)] += std.row(k).norm();
        ret[static_cast<std::size_t>(k)] +=
            reward(x.row(k).transpose(), z.row(k).tail(du).transpose(), next);
        x.row(k) = next.transpose();
      }
    }
  }
  for (Eigen::Index i = 0; i < count; ++i) {
    double r_sum = 0.0;
    double u_sum = 0.0;
    for (Eigen::Index r = 0; r < mc; ++r) {
      r_sum += ret[static_cast<std::size_t>(r * count + i)];
      u_sum += unc[static_cast<std::size_t>(r * count + i)];
    }
    out[static_cast<std::size_t>(i)] = {r_sum / static_cast<double>(mc),
                                        u_sum / static_cast<double>(mc)};
  }
  return out;
}

RolloutEstimate rollout_model(const DynamicsModel& model, const ActionSequence& seq,
                              const Vector& x0, const RewardFn& reward, const RolloutNoise& noise) {
  return evaluate_population(model, {seq.actions}, x0, reward, noise).front();
}

RolloutEstimate rollout_model(const GpPosterior& post, const ActionSequence& seq, const Vector& x0,
                              const RewardFn& reward, const RolloutNoise& noise) {
  return rollout_model(GpDynamics(post), seq, x0, reward, noise);
}

std::size_t select_candidate(const std::vector<RolloutEstimate>& scores, double lambda) {
  if (scores.empty()) throw std::invalid_argument("select_candidate: empty pool");
  std::size_t best = 0;
  double best_obj = scores[0].return_estimate + lambda * scores[0].uncertainty_estimate;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    const double obj = scores[i].return_estimate + lambda * scores[i].uncertainty_estimate;
    if (obj > best_obj) {
      best = i;
      best_obj = obj;
    }
  }
  return best;
}

PlanResult optimistic_plan(const DynamicsModel& model, const Vector& x0, const PlanConfig& cfg,
                           const RewardFn& reward, const PlanRequest& req) {
  cfg.validate();
  if (!(req.action_bound > 0.0)) throw std::invalid_argument("optimistic_plan: action_bound <= 0");
  const int horizon = cfg.plan_horizon;
  const Eigen::Index du = req.action_dim;
  const double bound = req.action_bound;

  Rng rng = make_rng(req.seed, Stream::Planner, {});
  const RolloutNoise noise = RolloutNoise::sample(
      cfg.mc_rollouts, horizon, static_cast<int>(x0.size()), req.noise_std, req.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix mean = Matrix::Zero(horizon, du);
  if (req.warm_start) {
    if (req.warm_start->rows() != horizon || req.warm_start->cols() != du)
      throw std::invalid_argument("optimistic_plan: warm start has the wrong shape");
    mean = *req.warm_start;
  }
  Matrix sdev = Matrix::Constant(horizon, du, cfg.init_action_std);

  PlanResult result;
  result.lambda = req.lambda;
  bool have_best = false;
  std::vector<Matrix> pool(static_cast<std::size_t>(cfg.population), Matrix(horizon, du));
  std::vector<std::size_t> order(pool.size());

  for (int iter = 0; iter < cfg.cem_iterations; ++iter) {
    for (std::size_t i = 0; i < pool.size(); ++i) {
      Matrix& seq = pool[i];
      if (iter == 0 && i == 0 && req.warm_start) {
        // The shifted previous plan competes unperturbed.
        seq = mean.cwiseMax(-bound).cwiseMin(bound);
        continue;
      }
      for (Eigen::Index j = 0; j < du; ++j)
        for (Eigen::Index t = 0; t < horizon; ++t)
          seq(t, j) = std::clamp(mean(t, j) + sdev(t, j) * normal(rng), -bound, bound);
    }
    const auto scores = evaluate_population(model, pool, x0, reward, noise);
    std::vector<double> objective(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i)
      objective[i] = scores[i].return_estimate + req.lambda * scores[i].uncertainty_estimate;

    const std::size_t pick = select_candidate(scores, req.lambda);
    if (!have_best || objective[pick] > result.objective_value) {
      have_best = true;
      result.best_sequence.actions = pool[pick];
      result.predicted_return = scores[pick].return_estimate;
      result.predicted_uncertainty = scores[pick].uncertainty_estimate;
      result.objective_value = objective[pick];
    }
    result.best_per_iteration.push_back(result.objective_value);

    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return objective[a] > objective[b]; });
    Matrix elite_mean = Matrix::Zero(horizon, du);
    for (int e = 0; e < cfg.elites; ++e) elite_mean += pool[order[static_cast<std::size_t>(e)]];
    elite_mean /= static_cast<double>(cfg.elites);
    Matrix elite_var = Matrix::Zero(horizon, du);
    for (int e = 0; e < cfg.elites; ++e)
      elite_var += (pool[order[static_cast<std::size_t>(e)]] - elite_mean).cwiseAbs2();
    elite_var /= static_cast<double>(cfg.elites);
    mean = elite_mean;
    sdev = elite_var.cwiseSqrt();
  }
  return result;
}

Vector act(const DynamicsModel& model, const Vector& state, const PlanConfig& cfg,
           const RewardFn& reward, const PlanRequest& req, PlanCache& cache) {
  const bool stale = !cache.plan || cache.steps_since_replan >= cfg.replan_every ||
                     cache.steps_since_replan >= cache.plan->best_sequence.horizon();
  if (stale) {
    PlanRequest r = req;
    Matrix warm;
    if (cache.plan) {
      const Matrix& prev = cache.plan->best_sequence.actions;
      const Eigen::Index shift = cache.steps_since_replan;
      warm = Matrix::Zero(cfg.plan_horizon, prev.cols());
      const Eigen::Index keep = std::max<Eigen::Index>(0, prev.rows() - shift);
      const Eigen::Index n = std::min<Eigen::Index>(keep, cfg.plan_horizon);
      if (n > 0) warm.topRows(n) = prev.middleRows(shift, n);
      if (n > 0 && n < cfg.plan_horizon)
        warm.bottomRows(cfg.plan_horizon - n).rowwise() = prev.row(prev.rows() - 1);
      r.warm_start = &warm;
    }
    cache.plan = optimistic_plan(model, state, cfg, reward, r);
    cache.steps_since_replan = 0;
    ++cache.plans_made;
  }
  const auto row = static_cast<Eigen::Index>(cache.steps_since_replan);
  Vector u = cache.plan->best_sequence.actions.row(row).transpose();
  ++cache.steps_since_replan;
  return u.cwiseMax(-req.action_bound).cwiseMin(req.action_bound);
}

}  // namespace ombrl
