#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ombrl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class KernelKind { SquaredExponential, Linear };

/// Covariance function shared by every output dimension.
///
/// For the squared-exponential kernel `prior_variance` is the signal variance,
/// so k(z, z) equals it exactly. For the linear kernel it is the declared bound
/// on k(z, z) over the operating domain and is only used by calibration.
struct KernelSpec {
  KernelKind kind = KernelKind::SquaredExponential;
  double lengthscale = 1.0;
  double prior_variance = 1.0;

  static KernelSpec squared_exponential(double lengthscale, double prior_variance);
  static KernelSpec linear(double prior_variance);

  void validate() const;
};

double kernel_eval(const KernelSpec& spec, const Vector& z1, const Vector& z2);

/// Cross-covariance between the rows of `a` and the rows of `b`.
Matrix kernel_matrix(const KernelSpec& spec, const Matrix& a, const Matrix& b);

/// Flattened regression data. One row of `inputs` per transition.
struct Dataset {
  Matrix inputs;   // count x (d_x + d_u)
  Matrix targets;  // count x d_x
  std::vector<int> episode_tags;

  Dataset() = default;
  Dataset(Eigen::Index input_dim, Eigen::Index output_dim);

  Eigen::Index size() const { return inputs.rows(); }
  Eigen::Index input_dim() const { return inputs.cols(); }
  Eigen::Index output_dim() const { return targets.cols(); }
  bool empty() const { return inputs.rows() == 0; }

  void validate() const;
};

class FactorizationError : public std::runtime_error {
 public:
  FactorizationError(const std::string& what, double max_jitter, double diag_ratio)
      : std::runtime_error(what), max_jitter_(max_jitter), diag_ratio_(diag_ratio) {}

  double max_jitter() const { return max_jitter_; }
  /// max(diag) / min(diag) of K + sigma^2 I, a cheap conditioning indicator.
  double diagonal_ratio() const { return diag_ratio_; }

 private:
  double max_jitter_;
  double diag_ratio_;
};

struct Prediction {
  Vector mean;
  Vector std;
};

/// Exact GP posterior with independent output dimensions that share one
/// kernel, one noise level and one Cholesky factor of (K + sigma^2 I).
/// Immutable after construction.
class GpPosterior {
 public:
  GpPosterior(KernelSpec spec, const Dataset& data, double noise_variance);

  const KernelSpec& spec() const { return spec_; }
  double noise_variance() const { return noise_variance_; }
  const Matrix& basis_inputs() const { return basis_; }
  const Matrix& solve_factor() const { return factor_; }
  const Matrix& weight_vectors() const { return weights_; }
  Eigen::Index input_dim() const { return basis_.cols(); }
  Eigen::Index output_dim() const { return weights_.cols(); }
  Eigen::Index size() const { return basis_.rows(); }
  /// Diagonal jitter that was added to make the factorization succeed.
  double jitter() const { return jitter_; }

  Prediction predict(const Vector& z) const;

  /// Batched prediction at the rows of `queries`. `mean` is filled with one
  /// row per query; `std` (optional) with the per-dimension posterior std.
  void predict_batch(const Matrix& queries, Matrix& mean, Matrix* std) const;

  /// Posterior variance at `z`, identical for every output dimension.
  double variance(const Vector& z) const;

  /// 1/2 log det(I + sigma^-2 K) of the fitted inputs, read off the factor.
  double information_gain() const;

 private:
  KernelSpec spec_;
  double noise_variance_;
  double jitter_ = 0.0;
  Matrix basis_;
  Matrix factor_;
  Matrix weights_;
};

GpPosterior gp_fit(const KernelSpec& spec, const Dataset& data, double noise_variance);
Prediction gp_predict(const GpPosterior& post, const Vector& z);

/// Realized information gain 1/2 log det(I + sigma^-2 K) of a point set (rows).
double info_gain(const KernelSpec& spec, const Matrix& inputs, double noise_variance);

/// Greedy surrogate for the maximum information gain. Repeatedly picks the
/// candidate row with the largest posterior variance (repeats allowed) and
/// returns the cumulative gain after 1..budget selections. Greedy selection is
/// nested, so entry b-1 is the estimate for budget b.
std::vector<double> greedy_info_gain(const KernelSpec& spec, const Matrix& candidates,
                                     int budget, double noise_variance);

enum class CalibrationMode { Reset, SlidingWindow };

struct CalibrationParams {
  double rkhs_bound = 1.0;     // B
  double noise_std = 0.1;      // sigma
  double confidence = 0.1;     // delta
  int state_dim = 1;           // d_x
  CalibrationMode mode = CalibrationMode::Reset;
  int horizon_T = 1;
  double reward_bound = 1.0;   // R_max
  double kernel_bound = 1.0;   // sigma_max

  void validate() const;
};

/// Confidence multiplier beta_n(delta, n - m). `buffer_len` (n - m) only enters
/// through `gamma`; it is part of the signature so callers keep the pairing.
double beta_width(const CalibrationParams& params, int buffer_len, double gamma, int episode_n);

/// Drift coefficient xi_{n-m} = 2 sigma_max sqrt((n-m)(1+sigma^2) gamma) / sigma^2.
double xi_coefficient(const CalibrationParams& params, int buffer_len, double gamma);

struct Interval {
  Vector lo;
  Vector hi;
};

Interval confidence_interval(const GpPosterior& post, const Vector& z, double beta,
                             double drift_bias);

}  // namespace ombrl
