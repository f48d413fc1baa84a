#include "rkhsbound/baselines.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace rkhsbound {

namespace {

void check_params(const ProbBoundParams& params) {
  if (!(params.confidence_p > 0.0 && params.confidence_p < 1.0)) {
    throw BoundError(ErrorKind::InvalidInput, "prob_bound: p must lie in (0, 1)",
                     params.confidence_p);
  }
  if (!(params.sub_gaussian_R > 0.0) || !(params.sigma > 0.0)) {
    throw BoundError(ErrorKind::InvalidInput, "prob_bound: R and sigma must be > 0");
  }
}

Eigen::LLT<Matrix> latent_llt(const ProblemData& data) {
  const Matrix kf = gram_matrix(data.kf, data.inputs);
  Eigen::LLT<Matrix> llt(kf);
  if (llt.info() != Eigen::Success && data.size() > 0) {
    const double jitter = 1e-12 * kf.trace() / static_cast<double>(kf.rows());
    llt.compute(kf + jitter * Matrix::Identity(kf.rows(), kf.cols()));
    if (llt.info() != Eigen::Success) {
      throw BoundError(ErrorKind::NotPD, "golomb_bound: Kf is numerically singular");
    }
  }
  return llt;
}

}  // namespace

double prob_beta(const ProblemData& data, const ProbBoundParams& params) {
  check_params(params);
  double log_det = 0.0;
  if (data.size() > 0) {
    const Matrix kf = gram_matrix(data.kf, data.inputs);
    const Matrix m = Matrix::Identity(kf.rows(), kf.cols()) + kf / (params.sigma * params.sigma);
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) {
      throw BoundError(ErrorKind::NotPD, "prob_beta: I + sigma^-2 Kf not PD");
    }
    log_det = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
  }
  const double tail = 2.0 * std::log(1.0 / (1.0 - params.confidence_p));
  return std::sqrt(data.gamma_f_sq) +
         (params.sub_gaussian_R / params.sigma) * std::sqrt(tail + log_det);
}

std::pair<double, double> prob_bound(const ProblemData& data, const ProbBoundParams& params,
                                     const PointRef& query) {
  const double beta = prob_beta(data, params);
  const PosteriorState state = posterior_state(data, params.sigma, query);
  const double half_width = beta * std::sqrt(state.var_at_query);
  return {state.mean_at_query - half_width, state.mean_at_query + half_width};
}

std::pair<double, double> golomb_bound(const ProblemData& data, const PointRef& query) {
  const double k_star_star = data.kf(query, query);
  if (data.size() == 0) {
    const double half = std::sqrt(data.gamma_f_sq * std::max(k_star_star, 0.0));
    return {-half, half};
  }
  const auto llt = latent_llt(data);
  const Vector alpha = llt.solve(data.outputs);
  const double interpolant_norm_sq = data.outputs.dot(alpha);
  if (interpolant_norm_sq > data.gamma_f_sq) {
    throw BoundError(ErrorKind::HypothesisFalsified,
                     "golomb_bound: interpolant norm exceeds the latent budget",
                     interpolant_norm_sq);
  }
  const Vector k_star = gram_column(data.kf, data.inputs, query);
  const double mean = k_star.dot(alpha);
  const double var = std::max(k_star_star - k_star.dot(llt.solve(k_star)), 0.0);
  const double half = std::sqrt(data.gamma_f_sq - interpolant_norm_sq) * std::sqrt(var);
  return {mean - half, mean + half};
}

double FogelEllipsoid::support_value(const Vector& direction) const {
  const double dir_norm = std::sqrt(std::max(direction.dot(shape * direction), 0.0));
  return direction.dot(center) + dir_norm * std::sqrt(std::max(radius_sq, 0.0));
}

bool FogelEllipsoid::contains(const Vector& theta, double slack) const {
  const Vector diff = theta - center;
  // ||diff||^2_{P^{-1}} through a solve with P
  Eigen::LLT<Matrix> llt(shape);
  if (llt.info() != Eigen::Success) {
    throw BoundError(ErrorKind::NumericalBreakdown, "fogel: shape matrix not PD");
  }
  const double dist_sq = diff.dot(llt.solve(diff));
  return dist_sq <= radius_sq + slack * (1.0 + radius_sq);
}

FogelEllipsoid fogel_ellipsoid(const ProblemData& data, const FeatureDecomposition& decomp) {
  if (data.kw.kind() != KernelKind::Dirac) {
    throw BoundError(ErrorKind::InvalidInput, "fogel_ellipsoid: requires the Dirac noise kernel");
  }
  const Matrix& phi = decomp.phi_train;
  if (phi.rows() != data.size()) {
    throw BoundError(ErrorKind::InvalidInput, "fogel_ellipsoid: decomposition size mismatch");
  }
  Matrix h = phi.transpose() * phi;
  h = 0.5 * (h + h.transpose());
  Eigen::LLT<Matrix> llt(h);
  if (llt.info() != Eigen::Success) {
    throw BoundError(ErrorKind::NumericalBreakdown,
                     "fogel_ellipsoid: features are not full column rank on the data");
  }
  const Vector b = phi.transpose() * data.outputs;

  FogelEllipsoid ell;
  ell.center = llt.solve(b);
  ell.shape = llt.solve(Matrix::Identity(h.rows(), h.cols()));
  ell.radius_sq = data.gamma_w_sq - data.outputs.squaredNorm() + b.dot(ell.center);
  const double tol = 1e-8 * (data.gamma_w_sq + data.outputs.squaredNorm());
  if (ell.radius_sq < -tol) {
    throw BoundError(ErrorKind::HypothesisFalsified,
                     "fogel_ellipsoid: data falsify the noise budget", ell.radius_sq);
  }
  ell.radius_sq = std::max(ell.radius_sq, 0.0);
  return ell;
}

}  // namespace rkhsbound
