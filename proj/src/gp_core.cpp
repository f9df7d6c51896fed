#include "ombrl/gp_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ombrl {

KernelSpec KernelSpec::squared_exponential(double lengthscale, double prior_variance) {
  KernelSpec spec{KernelKind::SquaredExponential, lengthscale, prior_variance};
  spec.validate();
  return spec;
}

KernelSpec KernelSpec::linear(double prior_variance) {
  KernelSpec spec{KernelKind::Linear, 1.0, prior_variance};
  spec.validate();
  return spec;
}

void KernelSpec::validate() const {
  if (!(prior_variance > 0.0)) throw std::invalid_argument("kernel prior_variance must be > 0");
  if (kind == KernelKind::SquaredExponential && !(lengthscale > 0.0))
    throw std::invalid_argument("kernel lengthscale must be > 0");
}

namespace {

inline double se_value(const KernelSpec& spec, double sq_dist) {
  return spec.prior_variance * std::exp(-sq_dist / (2.0 * spec.lengthscale * spec.lengthscale));
}

void check_dims(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

double kernel_eval(const KernelSpec& spec, const Vector& z1, const Vector& z2) {
  check_dims(z1.size(), z2.size(), "kernel_eval");
  if (spec.kind == KernelKind::Linear) return z1.dot(z2);
  return se_value(spec, (z1 - z2).squaredNorm());
}

Matrix kernel_matrix(const KernelSpec& spec, const Matrix& a, const Matrix& b) {
  check_dims(a.cols(), b.cols(), "kernel_matrix");
  if (spec.kind == KernelKind::Linear) return a * b.transpose();
  Matrix out(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out(i, j) = se_value(spec, (a.row(i) - b.row(j)).squaredNorm());
    }
  }
  return out;
}

namespace {

Vector kernel_diagonal(const KernelSpec& spec, const Matrix& z) {
  if (spec.kind == KernelKind::Linear) return z.rowwise().squaredNorm();
  return Vector::Constant(z.rows(), spec.prior_variance);
}

}  // namespace

Dataset::Dataset(Eigen::Index input_dim, Eigen::Index output_dim)
    : inputs(0, input_dim), targets(0, output_dim) {}

void Dataset::validate() const {
  if (inputs.rows() != targets.rows() ||
      static_cast<std::size_t>(inputs.rows()) != episode_tags.size())
    throw std::invalid_argument("dataset: inputs, targets and episode_tags differ in count");
  if (!std::is_sorted(episode_tags.begin(), episode_tags.end()))
    throw std::invalid_argument("dataset: episode_tags must be nondecreasing");
}

GpPosterior::GpPosterior(KernelSpec spec, const Dataset& data, double noise_variance)
    : spec_(spec), noise_variance_(noise_variance), basis_(data.inputs) {
  spec_.validate();
  if (!(noise_variance > 0.0)) throw std::invalid_argument("gp_fit: noise_variance must be > 0");
  data.validate();

  const Eigen::Index n = data.size();
  if (n == 0) {
    factor_.resize(0, 0);
    weights_.resize(0, data.output_dim());
    return;
  }

  Matrix gram = kernel_matrix(spec_, basis_, basis_);
  gram.diagonal().array() += noise_variance_;
  if (!gram.allFinite() || !data.targets.allFinite())
    throw FactorizationError("gp_fit: non-finite inputs or targets", 0.0,
                             std::numeric_limits<double>::quiet_NaN());

  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    const double scale = gram.trace() / static_cast<double>(n);
    bool ok = false;
    for (double rel = 1e-10; rel <= 1e-4 * (1.0 + 1e-9); rel *= 10.0) {
      jitter_ = rel * scale;
      Matrix jittered = gram;
      jittered.diagonal().array() += jitter_;
      llt.compute(jittered);
      if (llt.info() == Eigen::Success) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      const double ratio = gram.diagonal().maxCoeff() / gram.diagonal().minCoeff();
      std::ostringstream msg;
      msg << "gp_fit: Cholesky of (K + sigma^2 I) failed for " << n
          << " points after jitter up to " << jitter_ << " (diagonal ratio " << ratio << ")";
      throw FactorizationError(msg.str(), jitter_, ratio);
    }
  }
  factor_ = llt.matrixL();
  weights_ = llt.solve(data.targets);
}

void GpPosterior::predict_batch(const Matrix& queries, Matrix& mean, Matrix* std) const {
  check_dims(queries.cols(), basis_.cols(), "gp_predict");
  const Eigen::Index q = queries.rows();
  if (size() == 0) {
    mean.setZero(q, output_dim());
    if (std) {
      const Vector prior_std = kernel_diagonal(spec_, queries).cwiseMax(0.0).cwiseSqrt();
      *std = prior_std.replicate(1, output_dim());
    }
    return;
  }
  const Matrix cross = kernel_matrix(spec_, queries, basis_);  // q x n
  mean.noalias() = cross * weights_;
  if (std) {
    Matrix v = cross.transpose();
    factor_.triangularView<Eigen::Lower>().solveInPlace(v);
    const Vector prior = kernel_diagonal(spec_, queries);
    const Vector var = (prior - v.colwise().squaredNorm().transpose()).cwiseMax(0.0);
    *std = var.cwiseSqrt().replicate(1, output_dim());
  }
}

Prediction GpPosterior::predict(const Vector& z) const {
  Matrix mean;
  Matrix std;
  predict_batch(z.transpose(), mean, &std);
  return {mean.row(0).transpose(), std.row(0).transpose()};
}

double GpPosterior::variance(const Vector& z) const {
  const double s = predict(z).std(0);
  return s * s;
}

double GpPosterior::information_gain() const {
  if (size() == 0) return 0.0;
  // log det(K + s^2 I) - n log s^2 == log det(I + s^-2 K)
  const double log_det = 2.0 * factor_.diagonal().array().log().sum();
  return 0.5 * (log_det - static_cast<double>(size()) * std::log(noise_variance_));
}

GpPosterior gp_fit(const KernelSpec& spec, const Dataset& data, double noise_variance) {
  return GpPosterior(spec, data, noise_variance);
}

Prediction gp_predict(const GpPosterior& post, const Vector& z) { return post.predict(z); }

double info_gain(const KernelSpec& spec, const Matrix& inputs, double noise_variance) {
  if (!(noise_variance > 0.0)) throw std::invalid_argument("info_gain: noise_variance must be > 0");
  if (inputs.rows() == 0) return 0.0;
  Matrix m = kernel_matrix(spec, inputs, inputs) / noise_variance;
  m.diagonal().array() += 1.0;
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw std::runtime_error("info_gain: I + K/sigma^2 not PD");
  return Matrix(llt.matrixL()).diagonal().array().log().sum();
}

std::vector<double> greedy_info_gain(const KernelSpec& spec, const Matrix& candidates, int budget,
                                     double noise_variance) {
  if (!(noise_variance > 0.0))
    throw std::invalid_argument("greedy_info_gain: noise_variance must be > 0");
  std::vector<double> out;
  if (budget <= 0 || candidates.rows() == 0) return out;
  out.reserve(static_cast<std::size_t>(budget));

  // Posterior covariance among the candidates, updated by rank-1 downdates.
  Matrix cov = kernel_matrix(spec, candidates, candidates);
  double total = 0.0;
  for (int b = 0; b < budget; ++b) {
    Eigen::Index best = 0;
    cov.diagonal().maxCoeff(&best);  // first maximal index on ties
    const double var = std::max(cov(best, best), 0.0);
    total += 0.5 * std::log1p(var / noise_variance);
    out.push_back(total);
    const Vector col = cov.col(best);
    cov.noalias() -= col * col.transpose() / (var + noise_variance);
  }
  return out;
}

void CalibrationParams::validate() const {
  std::vector<std::string> bad;
  if (!(rkhs_bound >= 0.0)) bad.emplace_back("rkhs_bound");
  if (!(noise_std >= 0.0)) bad.emplace_back("noise_std");
  if (!(confidence > 0.0 && confidence < 1.0)) bad.emplace_back("confidence");
  if (state_dim < 1) bad.emplace_back("state_dim");
  if (horizon_T < 1) bad.emplace_back("horizon_T");
  if (!(reward_bound > 0.0)) bad.emplace_back("reward_bound");
  if (!(kernel_bound > 0.0)) bad.emplace_back("kernel_bound");
  if (!bad.empty()) {
    std::string msg = "calibration params out of range:";
    for (const auto& b : bad) msg += " " + b;
    throw std::invalid_argument(msg);
  }
}

double beta_width(const CalibrationParams& params, int buffer_len, double gamma, int episode_n) {
  if (gamma < 0.0 || buffer_len < 0 || episode_n < 1)
    throw std::invalid_argument("beta_width: gamma, buffer_len must be >= 0 and episode_n >= 1");
  double log_term = std::log(1.0 / params.confidence);
  if (params.mode == CalibrationMode::SlidingWindow) {
    log_term = std::log(static_cast<double>(episode_n) * params.horizon_T / params.confidence);
  }
  return params.rkhs_bound +
         params.noise_std * std::sqrt(2.0 * (gamma + params.state_dim * log_term));
}

double xi_coefficient(const CalibrationParams& params, int buffer_len, double gamma) {
  if (params.noise_std == 0.0)
    throw std::domain_error("xi_coefficient: undefined for noise_std == 0");
  if (gamma < 0.0 || buffer_len < 0)
    throw std::invalid_argument("xi_coefficient: gamma and buffer_len must be >= 0");
  const double s2 = params.noise_std * params.noise_std;
  return 2.0 * params.kernel_bound * std::sqrt(buffer_len * (1.0 + s2) * gamma) / s2;
}

Interval confidence_interval(const GpPosterior& post, const Vector& z, double beta,
                             double drift_bias) {
  const Prediction p = post.predict(z);
  const Vector half = (beta * p.std).array() + drift_bias;
  return {p.mean - half, p.mean + half};
}

}  // namespace ombrl
