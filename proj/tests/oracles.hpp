#pragma once

// Reference implementations used only by tests. They deliberately take the
// slow, textbook route (explicit inverses, determinants, direct loops) and
// share no code with the library beyond the Eigen types.

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline double se(const Vec& a, const Vec& b, double ell, double var) {
  double d2 = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) d2 += (a(i) - b(i)) * (a(i) - b(i));
  return var * std::exp(-d2 / (2.0 * ell * ell));
}

inline Mat gram(const Mat& a, const Mat& b, double ell, double var) {
  Mat k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      k(i, j) = se(a.row(i).transpose(), b.row(j).transpose(), ell, var);
  return k;
}

struct DensePosterior {
  Vec mean;  // one entry per output dimension
  double variance = 0.0;
};

// mu(z) = k(z)^T (K + s2 I)^-1 Y, var(z) = k(z,z) - k(z)^T (K + s2 I)^-1 k(z).
inline DensePosterior dense_posterior(const Mat& X, const Mat& Y, const Vec& z, double ell,
                                      double var, double s2) {
  const Eigen::Index n = X.rows();
  const Mat inv = (gram(X, X, ell, var) + s2 * Mat::Identity(n, n)).fullPivLu().inverse();
  const Mat kz = gram(X, z.transpose(), ell, var);
  DensePosterior out;
  out.mean = (kz.transpose() * inv * Y).transpose();
  out.variance = se(z, z, ell, var) - (kz.transpose() * inv * kz)(0, 0);
  return out;
}

// 1/2 log det(I + K / s2) via a determinant.
inline double info_gain(const Mat& X, double ell, double var, double s2) {
  const Eigen::Index n = X.rows();
  if (n == 0) return 0.0;
  const Mat m = Mat::Identity(n, n) + gram(X, X, ell, var) / s2;
  return 0.5 * std::log(m.fullPivLu().determinant());
}

// Retained episode set while planning episode n, from the closed forms.
inline std::set<int> reset_retained(int n, int H) {
  std::set<int> s;
  for (int e = H * ((n - 1) / H) + 1; e <= n - 1; ++e) s.insert(e);
  return s;
}

inline std::set<int> window_retained(int n, int w) {
  std::set<int> s;
  for (int e = std::max(1, n - w); e <= n - 1; ++e) s.insert(e);
  return s;
}

inline Mat random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double lo,
                         double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

}  // namespace oracle
