#include "ombrl/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ombrl {

void DecaySchedule::validate() const {
  if (!(rate >= 0.0)) throw std::invalid_argument("decay rate must be >= 0");
  if (!(theta_max >= theta_min)) throw std::invalid_argument("theta_max must be >= theta_min");
  if (start_episode < 0) throw std::invalid_argument("decay start episode must be >= 0");
}

double decay_value(const DecaySchedule& s, int n) {
  if (n < 1) throw std::invalid_argument("decay_value: n must be >= 1");
  const double elapsed = std::max(0, n - s.start_episode);
  return std::exp(-s.rate * elapsed) * (s.theta_max - s.theta_min) + s.theta_min;
}

EnvSpec EnvSpec::make_pendulum(const PendulumParams& params, const DecaySchedule& schedule,
                               int horizon_T, double noise_std, double reward_bound) {
  EnvSpec spec;
  spec.kind = EnvKind::Pendulum;
  spec.horizon_T = horizon_T;
  spec.state_dim = 2;
  spec.action_dim = 1;
  spec.noise_std = noise_std;
  spec.reward_bound = reward_bound;
  spec.schedule = schedule;
  spec.pendulum = params;
  spec.validate();
  return spec;
}

EnvSpec EnvSpec::make_synth_rkhs(SynthRkhsParams params, const DecaySchedule& schedule,
                                 int horizon_T, double noise_std, double reward_bound) {
  EnvSpec spec;
  spec.kind = EnvKind::SynthRkhs;
  spec.horizon_T = horizon_T;
  spec.state_dim = static_cast<int>(params.base_coefficients.cols());
  spec.action_dim = static_cast<int>(params.centers.cols()) - spec.state_dim;
  spec.noise_std = noise_std;
  spec.reward_bound = reward_bound;
  spec.schedule = schedule;
  spec.synth = std::move(params);
  spec.validate();
  return spec;
}

void EnvSpec::validate() const {
  if (horizon_T < 1) throw std::invalid_argument("env horizon_T must be >= 1");
  if (!(noise_std >= 0.0)) throw std::invalid_argument("env noise_std must be >= 0");
  if (!(reward_bound > 0.0)) throw std::invalid_argument("env reward_bound must be > 0");
  if (state_dim < 1 || action_dim < 1) throw std::invalid_argument("env dimensions must be >= 1");
  schedule.validate();
  if (!(schedule.theta_min > 0.0)) throw std::invalid_argument("actuator limit must stay > 0");
  if (kind == EnvKind::Pendulum) {
    const auto& p = pendulum;
    if (!(p.mass > 0.0 && p.length > 0.0 && p.dt > 0.0 && p.max_speed > 0.0))
      throw std::invalid_argument("pendulum mass, length, dt and max_speed must be > 0");
    if (state_dim != 2 || action_dim != 1)
      throw std::invalid_argument("pendulum has d_x = 2 and d_u = 1");
  } else {
    synth.kernel.validate();
    const auto k = synth.centers.rows();
    if (k < 1 || synth.base_coefficients.rows() != k || synth.drift_coefficients.rows() != k ||
        synth.drift_coefficients.cols() != synth.base_coefficients.cols() ||
        synth.centers.cols() != state_dim + action_dim)
      throw std::invalid_argument("synthetic system: inconsistent centers/coefficients");
  }
}

namespace {

double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  double w = std::fmod(a + pi, 2.0 * pi);
  if (w < 0.0) w += 2.0 * pi;
  return w - pi;
}

Vector pendulum_mean(const EnvSpec& spec, double theta, double theta_dot, double u) {
  const auto& p = spec.pendulum;
  const double accel = 3.0 * p.gravity / (2.0 * p.length) * std::sin(theta) +
                       3.0 / (p.mass * p.length * p.length) * u;
  double new_dot = std::clamp(theta_dot + accel * p.dt, -p.max_speed, p.max_speed);
  Vector out(2);
  out << theta + new_dot * p.dt, new_dot;
  return out;
}

Vector synth_mean(const EnvSpec& spec, const Matrix& coeffs, const Vector& z) {
  const Matrix kz = kernel_matrix(spec.synth.kernel, z.transpose(), spec.synth.centers);
  return (kz * coeffs).transpose();
}

}  // namespace

double pendulum_cost_norm(const EnvSpec& spec) {
  const double u1 = spec.nominal_action_bound();
  const double v = spec.pendulum.max_speed;
  return std::numbers::pi * std::numbers::pi + 0.1 * v * v + 0.001 * u1 * u1;
}

EnvState env_reset(const EnvSpec& spec, int episode_n, std::uint64_t seed) {
  if (episode_n < 1) throw std::invalid_argument("env_reset: episode must be >= 1");
  EnvState s;
  s.episode = episode_n;
  s.t = 0;
  s.x = Vector::Zero(spec.state_dim);
  if (spec.kind == EnvKind::Pendulum) {
    Rng rng = make_rng(seed, Stream::InitialState, {static_cast<std::uint64_t>(episode_n)});
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> speed(-1.0, 1.0);
    s.x(0) = angle(rng);
    s.x(1) = speed(rng);
  }
  return s;
}

Vector applied_action(const EnvSpec& spec, int episode_n, const Vector& u) {
  const double limit = decay_value(spec.schedule, episode_n);
  if (spec.actuation == Actuation::Scale) {
    const double nominal = spec.nominal_action_bound();
    return u.cwiseMax(-nominal).cwiseMin(nominal) * (limit / nominal);
  }
  return u.cwiseMax(-limit).cwiseMin(limit);
}

Matrix synth_coefficients(const EnvSpec& spec, int episode_n) {
  const double steps = std::max(0, episode_n - spec.schedule.start_episode);
  return spec.synth.base_coefficients + steps * spec.synth.drift_coefficients;
}

double env_reward(const EnvSpec& spec, const Vector& x, const Vector& u, const Vector& x_next) {
  double r = 0.0;
  if (spec.kind == EnvKind::Pendulum) {
    const double th = wrap_angle(x(0));
    const double cost = th * th + 0.1 * x(1) * x(1) + 0.001 * u.squaredNorm();
    r = spec.reward_bound * (1.0 - cost / pendulum_cost_norm(spec));
  } else {
    r = spec.reward_bound * std::exp(-x_next.squaredNorm());
  }
  return std::clamp(r, 0.0, spec.reward_bound);
}

StepResult env_step(const EnvSpec& spec, const EnvState& s, const Vector& u, const Vector& noise) {
  if (s.t >= spec.horizon_T)
    throw std::out_of_range("env_step: step " + std::to_string(s.t) + " beyond horizon " +
                            std::to_string(spec.horizon_T));
  if (u.size() != spec.action_dim || noise.size() != spec.state_dim)
    throw std::invalid_argument("env_step: action or noise dimension mismatch");
  const Vector ua = applied_action(spec, s.episode, u);
  Vector mean;
  if (spec.kind == EnvKind::Pendulum) {
    mean = pendulum_mean(spec, s.x(0), s.x(1), ua(0));
  } else {
    Vector z(spec.input_dim());
    z << s.x, ua;
    mean = synth_mean(spec, synth_coefficients(spec, s.episode), z);
  }
  StepResult out;
  out.next.x = mean + noise;
  out.next.t = s.t + 1;
  out.next.episode = s.episode;
  out.reward = env_reward(spec, s.x, ua, out.next.x);
  return out;
}

Matrix true_dynamics(const EnvSpec& spec, int episode_n, const Matrix& inputs) {
  if (inputs.cols() != spec.input_dim())
    throw std::invalid_argument("true_dynamics: input dimension mismatch");
  Matrix out(inputs.rows(), spec.state_dim);
  if (spec.kind == EnvKind::Pendulum) {
    for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
      const Vector ua = applied_action(spec, episode_n, inputs.row(i).tail(1).transpose());
      out.row(i) = pendulum_mean(spec, inputs(i, 0), inputs(i, 1), ua(0)).transpose();
    }
    return out;
  }
  Matrix z = inputs;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    z.row(i).tail(spec.action_dim) =
        applied_action(spec, episode_n, inputs.row(i).tail(spec.action_dim).transpose())
            .transpose();
  }
  out = kernel_matrix(spec.synth.kernel, z, spec.synth.centers) *
        synth_coefficients(spec, episode_n);
  return out;
}

Matrix episode_noise(const EnvSpec& spec, int episode_n, std::uint64_t seed) {
  Matrix w = Matrix::Zero(spec.horizon_T, spec.state_dim);
  if (spec.noise_std == 0.0) return w;
  Rng rng = make_rng(seed, Stream::ProcessNoise, {static_cast<std::uint64_t>(episode_n)});
  std::normal_distribution<double> normal(0.0, spec.noise_std);
  for (Eigen::Index t = 0; t < w.rows(); ++t)
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(t, j) = normal(rng);
  return w;
}

bool is_exact_drift(const EnvSpec& spec) { return spec.kind == EnvKind::SynthRkhs; }

double drift_increment(const EnvSpec& spec, int n) {
  if (n < 1) throw std::invalid_argument("drift_increment: n must be >= 1");
  if (spec.kind == EnvKind::Pendulum) {
    const auto& p = spec.pendulum;
    const double sensitivity = 3.0 / (p.mass * p.length * p.length) * p.dt;
    return std::abs(decay_value(spec.schedule, n + 1) - decay_value(spec.schedule, n)) *
           sensitivity;
  }
  const Matrix delta = synth_coefficients(spec, n + 1) - synth_coefficients(spec, n);
  const Matrix gram = kernel_matrix(spec.synth.kernel, spec.synth.centers, spec.synth.centers);
  double total = 0.0;
  for (Eigen::Index j = 0; j < delta.cols(); ++j) {
    const double q = delta.col(j).dot(gram * delta.col(j));
    total += std::sqrt(std::max(q, 0.0));
  }
  return total;
}

void DriftTracker::record(double increment) {
  if (increment < 0.0) throw std::invalid_argument("drift increments are nonnegative");
  increments_.push_back(increment);
  total_ += increment;
}

namespace {

Matrix scaled_to_norm(const Matrix& coeffs, const Matrix& gram, double norm) {
  Matrix out = coeffs;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double q = std::sqrt(std::max(out.col(j).dot(gram * out.col(j)), 0.0));
    if (q > 0.0) out.col(j) *= norm / q;
  }
  return out;
}

}  // namespace

SynthRkhsParams random_synth_params(const KernelSpec& kernel, int state_dim, int action_dim,
                                    int centers, double base_norm, double drift_norm,
                                    std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::Synthetic, {});
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  SynthRkhsParams p;
  p.kernel = kernel;
  p.centers.resize(centers, state_dim + action_dim);
  for (Eigen::Index i = 0; i < p.centers.size(); ++i) p.centers.data()[i] = unif(rng);
  Matrix base(centers, state_dim);
  Matrix drift(centers, state_dim);
  for (Eigen::Index i = 0; i < base.size(); ++i) base.data()[i] = normal(rng);
  for (Eigen::Index i = 0; i < drift.size(); ++i) drift.data()[i] = normal(rng);
  const Matrix gram = kernel_matrix(kernel, p.centers, p.centers);
  p.base_coefficients = scaled_to_norm(base, gram, base_norm);
  p.drift_coefficients = scaled_to_norm(drift, gram, drift_norm);
  return p;
}

}  // namespace ombrl
