#pragma once

#include "rkhsbound/decomp.hpp"

namespace rkhsbound {

// Training set plus the hypothesis-class description: latent kernel kf, noise
// kernel kw, and the squared norm budgets for both.
struct ProblemData {
  Matrix inputs;   // N x d, pairwise distinct rows
  Vector outputs;  // length N
  KernelSpec kf;
  KernelSpec kw;
  double gamma_f_sq = 1.0;
  double gamma_w_sq = 1.0;

  Eigen::Index size() const noexcept { return inputs.rows(); }
  Eigen::Index dim() const noexcept { return inputs.cols(); }
};

// Validates distinct inputs, matching sizes and positive budgets.
ProblemData make_problem_data(Matrix inputs, Vector outputs, KernelSpec kf, KernelSpec kw,
                              double gamma_f_sq, double gamma_w_sq);

// Index of the training input matching the query under the point-equality
// tolerance, or -1.
Eigen::Index matching_train_index(const ProblemData& data, const PointRef& query);

struct PosteriorState {
  double sigma = 0.0;
  double mean_at_query = 0.0;
  double var_at_query = 0.0;
  double interpolant_norm_sq = 0.0;
  double beta_sq = 0.0;
};

// Reference implementations through a Cholesky factorization of
// Kf + sigma^2 Kw; one factorization is shared by all four quantities when
// going through posterior_state.
double posterior_mean(const ProblemData& data, double sigma, const PointRef& query);
double posterior_var(const ProblemData& data, double sigma, const PointRef& query);
double interpolant_norm_sq(const ProblemData& data, double sigma);
double beta_sq(const ProblemData& data, double sigma);
PosteriorState posterior_state(const ProblemData& data, double sigma, const PointRef& query);

// Spectral cache over the matrix pencil (Kf, Kw): with Kw = R R^T and
// R^{-1} Kf R^{-T} = U L U^T, every sigma probe costs O(N) instead of a fresh
// O(N^3) factorization. Agrees with the Cholesky path to rounding; the unit
// tests pin the two together.
class SigmaSweep {
 public:
  explicit SigmaSweep(const ProblemData& data);

  struct QueryCache {
    Vector k_tilde;          // U^T R^{-1} Kf[X, query]
    double k_star_star = 0;  // kf(query, query)
  };

  QueryCache make_query_cache(const PointRef& query) const;

  double interpolant_norm_sq(double sigma) const;
  double beta_sq(double sigma) const;
  double mean(const QueryCache& q, double sigma) const;
  double var(const QueryCache& q, double sigma) const;
  PosteriorState state(const QueryCache& q, double sigma) const;

  Eigen::Index size() const noexcept { return eigenvalues_.size(); }
  const Vector& pencil_eigenvalues() const noexcept { return eigenvalues_; }
  double gamma_f_sq() const noexcept { return gamma_f_sq_; }
  double gamma_w_sq() const noexcept { return gamma_w_sq_; }

 private:
  KernelSpec kf_;
  Matrix inputs_;
  Matrix noise_factor_;   // upper-triangular R
  Matrix eigenvectors_;   // U
  Vector eigenvalues_;    // L, clamped at 0
  Vector y_tilde_;        // U^T R^{-1} y
  double gamma_f_sq_ = 0.0;
  double gamma_w_sq_ = 0.0;
  double var_clamp_tol_ = 0.0;
};

}  // namespace rkhsbound
