#include "rkhsbound/decomp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace rkhsbound {

double psd_tolerance(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  return 1e-10 * m.trace() / static_cast<double>(m.rows());
}

double rank_tolerance(double s_max) { return 1e-10 * s_max; }

double reconstruction_tolerance(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return 1e-8 * m.cwiseAbs().maxCoeff();
}

FeatureDecomposition feature_decompose(const Matrix& kf_full) {
  const Eigen::Index n = kf_full.rows();
  if (n == 0 || kf_full.cols() != n) {
    throw BoundError(ErrorKind::InvalidInput, "feature_decompose: matrix must be square, nonempty");
  }
  const Matrix sym = 0.5 * (kf_full + kf_full.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw BoundError(ErrorKind::NumericalBreakdown, "feature_decompose: eigendecomposition failed");
  }

  const double tol_psd = psd_tolerance(sym);
  const double min_eig = eig.eigenvalues().minCoeff();
  if (min_eig < -tol_psd) {
    throw BoundError(ErrorKind::NotPSD, "feature_decompose: matrix is not PSD", min_eig);
  }

  FeatureDecomposition decomp;
  decomp.singular_values = eig.eigenvalues().reverse().cwiseMax(0.0);
  const double s_max = decomp.singular_values[0];
  const double tol_rank = rank_tolerance(s_max);
  Eigen::Index rank = 0;
  while (rank < n && decomp.singular_values[rank] > tol_rank) ++rank;
  decomp.rank = rank;

  // Phi = V_r S_r^{1/2}; eigenvectors come back in ascending order.
  Matrix phi(n, rank);
  for (Eigen::Index j = 0; j < rank; ++j) {
    phi.col(j) = eig.eigenvectors().col(n - 1 - j) * std::sqrt(decomp.singular_values[j]);
  }
  decomp.phi_train = phi.topRows(n - 1);
  decomp.phi_test = phi.row(n - 1);
  return decomp;
}

NoiseCholesky::NoiseCholesky(const Matrix& kw) {
  const Eigen::Index n = kw.rows();
  if (kw.cols() != n) {
    throw BoundError(ErrorKind::InvalidInput, "noise_cholesky: matrix must be square");
  }
  if (n == 0) {
    factor_.resize(0, 0);
    return;
  }
  const Matrix sym = 0.5 * (kw + kw.transpose());
  // R R^T = Kw with R upper-triangular: factor the row/column-reversed matrix
  // and reverse the lower-triangular result back.
  const Matrix reversed = sym.reverse();
  Eigen::LLT<Matrix> llt(reversed);
  if (llt.info() != Eigen::Success) {
    const double jitter = 1e-12 * sym.trace() / static_cast<double>(n);
    llt.compute(reversed + jitter * Matrix::Identity(n, n));
    if (llt.info() != Eigen::Success) {
      throw BoundError(ErrorKind::NotPD,
                       "noise_cholesky: matrix is not positive definite "
                       "(check that the noise kernel is PD and inputs are distinct)",
                       jitter);
    }
  }
  factor_ = llt.matrixL().toDenseMatrix().reverse();
}

Vector NoiseCholesky::factor_solve(const Vector& v) const {
  if (v.size() != factor_.rows()) {
    throw BoundError(ErrorKind::InvalidInput, "factor_solve: size mismatch");
  }
  if (v.size() == 0) return v;
  return factor_.triangularView<Eigen::Upper>().solve(v);
}

Matrix NoiseCholesky::factor_solve(const Matrix& m) const {
  if (m.rows() != factor_.rows()) {
    throw BoundError(ErrorKind::InvalidInput, "factor_solve: size mismatch");
  }
  if (m.rows() == 0) return m;
  return factor_.triangularView<Eigen::Upper>().solve(m);
}

double NoiseCholesky::weighted_sq_norm(const Vector& v) const {
  return factor_solve(v).squaredNorm();
}

NoiseCholesky noise_cholesky(const Matrix& kw) { return NoiseCholesky(kw); }

}  // namespace rkhsbound
