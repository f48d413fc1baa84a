#include "rkhsbound/gp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <utility>

namespace rkhsbound {

ProblemData make_problem_data(Matrix inputs, Vector outputs, KernelSpec kf, KernelSpec kw,
                              double gamma_f_sq, double gamma_w_sq) {
  if (inputs.rows() != outputs.size()) {
    throw BoundError(ErrorKind::InvalidInput, "inputs and outputs disagree on N",
                     static_cast<double>(inputs.rows() - outputs.size()));
  }
  if (!(gamma_f_sq > 0.0) || !(gamma_w_sq > 0.0)) {
    throw BoundError(ErrorKind::InvalidInput, "budgets gamma_f_sq, gamma_w_sq must be > 0");
  }
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < inputs.rows(); ++j) {
      if (points_equal(inputs.row(i).transpose(), inputs.row(j).transpose())) {
        throw BoundError(ErrorKind::InvalidInput, "training inputs must be pairwise distinct",
                         static_cast<double>(i));
      }
    }
  }
  return ProblemData{std::move(inputs), std::move(outputs), std::move(kf), std::move(kw),
                     gamma_f_sq, gamma_w_sq};
}

Eigen::Index matching_train_index(const ProblemData& data, const PointRef& query) {
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    if (points_equal(data.inputs.row(i).transpose(), query)) return i;
  }
  return -1;
}

namespace {

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw BoundError(ErrorKind::InvalidInput, "sigma must be positive and finite", sigma);
  }
}

// Cholesky of Kf + sigma^2 Kw with the single-jitter retry policy.
Eigen::LLT<Matrix> regularized_llt(const ProblemData& data, double sigma) {
  const Matrix kf = gram_matrix(data.kf, data.inputs);
  const Matrix kw = gram_matrix(data.kw, data.inputs);
  const Matrix reg = kf + sigma * sigma * kw;
  Eigen::LLT<Matrix> llt(reg);
  if (llt.info() != Eigen::Success) {
    const double jitter = 1e-12 * reg.trace() / static_cast<double>(reg.rows());
    llt.compute(reg + jitter * Matrix::Identity(reg.rows(), reg.cols()));
    if (llt.info() != Eigen::Success) {
      throw BoundError(ErrorKind::NotPD, "Kf + sigma^2 Kw is not positive definite", sigma);
    }
  }
  return llt;
}

}  // namespace

double posterior_mean(const ProblemData& data, double sigma, const PointRef& query) {
  return posterior_state(data, sigma, query).mean_at_query;
}

double posterior_var(const ProblemData& data, double sigma, const PointRef& query) {
  return posterior_state(data, sigma, query).var_at_query;
}

double interpolant_norm_sq(const ProblemData& data, double sigma) {
  check_sigma(sigma);
  if (data.size() == 0) return 0.0;
  const auto llt = regularized_llt(data, sigma);
  return data.outputs.dot(llt.solve(data.outputs));
}

double beta_sq(const ProblemData& data, double sigma) {
  check_sigma(sigma);
  return data.gamma_f_sq + data.gamma_w_sq / (sigma * sigma) - interpolant_norm_sq(data, sigma);
}

PosteriorState posterior_state(const ProblemData& data, double sigma, const PointRef& query) {
  check_sigma(sigma);
  PosteriorState state;
  state.sigma = sigma;
  const double k_star_star = data.kf(query, query);
  if (data.size() == 0) {
    state.var_at_query = k_star_star;
    state.beta_sq = data.gamma_f_sq + data.gamma_w_sq / (sigma * sigma);
    return state;
  }

  const auto llt = regularized_llt(data, sigma);
  const Vector k_star = gram_column(data.kf, data.inputs, query);
  const Vector alpha = llt.solve(data.outputs);

  state.mean_at_query = k_star.dot(alpha);
  state.interpolant_norm_sq = data.outputs.dot(alpha);
  state.beta_sq =
      data.gamma_f_sq + data.gamma_w_sq / (sigma * sigma) - state.interpolant_norm_sq;

  double var = k_star_star - k_star.dot(llt.solve(k_star));
  const double tol = reconstruction_tolerance(gram_matrix(data.kf, data.inputs)) +
                     1e-8 * std::abs(k_star_star);
  if (var < -tol) {
    throw BoundError(ErrorKind::NumericalBreakdown, "posterior variance is negative", var);
  }
  state.var_at_query = std::max(var, 0.0);
  return state;
}

SigmaSweep::SigmaSweep(const ProblemData& data)
    : kf_(data.kf),
      inputs_(data.inputs),
      gamma_f_sq_(data.gamma_f_sq),
      gamma_w_sq_(data.gamma_w_sq) {
  const Eigen::Index n = data.size();
  if (n == 0) {
    noise_factor_.resize(0, 0);
    eigenvectors_.resize(0, 0);
    eigenvalues_.resize(0);
    y_tilde_.resize(0);
    return;
  }
  const Matrix kf = gram_matrix(data.kf, data.inputs);
  const Matrix kw = gram_matrix(data.kw, data.inputs);
  var_clamp_tol_ = reconstruction_tolerance(kf);

  NoiseCholesky chol(kw);
  noise_factor_ = chol.factor();

  // B = R^{-1} Kf R^{-T}, symmetric PSD; Kf + s^2 Kw = R U (L + s^2 I) U^T R^T.
  const Matrix half = chol.factor_solve(kf);            // R^{-1} Kf
  Matrix pencil = chol.factor_solve(half.transpose());  // R^{-1} Kf R^{-T}
  pencil = 0.5 * (pencil + pencil.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> eig(pencil);
  if (eig.info() != Eigen::Success) {
    throw BoundError(ErrorKind::NumericalBreakdown, "pencil eigendecomposition failed");
  }
  const double tol_psd = psd_tolerance(pencil);
  if (eig.eigenvalues().minCoeff() < -tol_psd) {
    throw BoundError(ErrorKind::NotPSD, "latent kernel matrix is not PSD in the noise metric",
                     eig.eigenvalues().minCoeff());
  }
  eigenvectors_ = eig.eigenvectors();
  eigenvalues_ = eig.eigenvalues().cwiseMax(0.0);
  y_tilde_ = eigenvectors_.transpose() * chol.factor_solve(data.outputs);
}

SigmaSweep::QueryCache SigmaSweep::make_query_cache(const PointRef& query) const {
  QueryCache cache;
  cache.k_star_star = kf_(query, query);
  if (size() == 0) {
    cache.k_tilde.resize(0);
    return cache;
  }
  const Vector k_star = gram_column(kf_, inputs_, query);
  cache.k_tilde =
      eigenvectors_.transpose() *
      noise_factor_.triangularView<Eigen::Upper>().solve(k_star);
  return cache;
}

double SigmaSweep::interpolant_norm_sq(double sigma) const {
  check_sigma(sigma);
  const double s2 = sigma * sigma;
  double norm = 0.0;
  for (Eigen::Index i = 0; i < size(); ++i) {
    norm += y_tilde_[i] * y_tilde_[i] / (eigenvalues_[i] + s2);
  }
  return norm;
}

double SigmaSweep::beta_sq(double sigma) const {
  return gamma_f_sq_ + gamma_w_sq_ / (sigma * sigma) - interpolant_norm_sq(sigma);
}

double SigmaSweep::mean(const QueryCache& q, double sigma) const {
  check_sigma(sigma);
  const double s2 = sigma * sigma;
  double mean = 0.0;
  for (Eigen::Index i = 0; i < size(); ++i) {
    mean += q.k_tilde[i] * y_tilde_[i] / (eigenvalues_[i] + s2);
  }
  return mean;
}

double SigmaSweep::var(const QueryCache& q, double sigma) const {
  check_sigma(sigma);
  const double s2 = sigma * sigma;
  double explained = 0.0;
  for (Eigen::Index i = 0; i < size(); ++i) {
    explained += q.k_tilde[i] * q.k_tilde[i] / (eigenvalues_[i] + s2);
  }
  const double var = q.k_star_star - explained;
  const double tol = var_clamp_tol_ + 1e-8 * std::abs(q.k_star_star);
  if (var < -tol) {
    throw BoundError(ErrorKind::NumericalBreakdown, "posterior variance is negative", var);
  }
  return std::max(var, 0.0);
}

PosteriorState SigmaSweep::state(const QueryCache& q, double sigma) const {
  PosteriorState state;
  state.sigma = sigma;
  state.mean_at_query = mean(q, sigma);
  state.var_at_query = var(q, sigma);
  state.interpolant_norm_sq = interpolant_norm_sq(sigma);
  state.beta_sq = gamma_f_sq_ + gamma_w_sq_ / (sigma * sigma) - state.interpolant_norm_sq;
  return state;
}

}  // namespace rkhsbound
