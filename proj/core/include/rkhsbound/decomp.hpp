#pragma once

#include "rkhsbound/kernels.hpp"

namespace rkhsbound {

// Shared numerical tolerances. All are relative to the scale of the matrix
// they guard so the case logic stays deterministic across problem scalings.
double psd_tolerance(const Matrix& m);                 // 1e-10 * trace / n
double rank_tolerance(double s_max);                   // 1e-10 * s_max
double reconstruction_tolerance(const Matrix& m);      // 1e-8 * max |entry|

// Rank-revealing factorization K = Phi Phi^T of the latent kernel matrix at
// the training inputs plus the query, row-partitioned accordingly.
struct FeatureDecomposition {
  Matrix phi_train;             // N x r
  Eigen::RowVectorXd phi_test;  // 1 x r, last row of Phi
  Eigen::Index rank = 0;
  Vector singular_values;       // length N+1, descending, clamped at 0
};

// Symmetric eigendecomposition of a PSD matrix with singular values below
// rank_tolerance(s_max) truncated. Throws NotPSD if an eigenvalue is negative
// beyond psd_tolerance.
FeatureDecomposition feature_decompose(const Matrix& kf_full);

// Upper-triangular factor R with R R^T = Kw, used for weighted norms
// ||v||^2_{Kw^{-1}} through triangular solves. One adaptive jitter of
// 1e-12 * trace / N is attempted before declaring NotPD.
class NoiseCholesky {
 public:
  explicit NoiseCholesky(const Matrix& kw);

  const Matrix& factor() const noexcept { return factor_; }
  Eigen::Index size() const noexcept { return factor_.rows(); }

  Vector factor_solve(const Vector& v) const;  // R^{-1} v
  Matrix factor_solve(const Matrix& m) const;
  double weighted_sq_norm(const Vector& v) const;  // v^T Kw^{-1} v

 private:
  Matrix factor_;
};

NoiseCholesky noise_cholesky(const Matrix& kw);

}  // namespace rkhsbound
