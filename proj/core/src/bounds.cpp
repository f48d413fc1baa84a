#include "rkhsbound/bounds.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "rkhsbound/scalar_min.hpp"

namespace rkhsbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double side_sign(Side side) { return side == Side::Upper ? 1.0 : -1.0; }

double relaxed_value(const PosteriorState& state, Side side) {
  if (state.beta_sq < 0.0) {
    throw BoundError(ErrorKind::HypothesisFalsified,
                     "beta^2 < 0 at this sigma; the relaxation is uninformative here",
                     state.beta_sq);
  }
  return state.mean_at_query +
         side_sign(side) * std::sqrt(state.beta_sq) * std::sqrt(state.var_at_query);
}

// Shared machinery for Proposition-2 quantities, built on the feature
// decomposition of the (N+1)-point latent kernel matrix.
struct Case2Terms {
  bool span_ok = false;
  double ls_value = 0.0;     // Phi_{N+1} theta_mu
  double phi_p_norm = 0.0;   // || Phi_{N+1}^T ||_P
  double radicand = 0.0;     // Gw^2 - y^T Kw^{-1} y + ||theta_mu||^2_{P^{-1}}
  Vector theta_mu;
  Vector p_phi;              // P Phi_{N+1}^T
};

bool span_condition(const FeatureDecomposition& decomp) {
  if (decomp.rank == 0) return true;
  const double threshold = std::sqrt(rank_tolerance(decomp.singular_values[0]));
  if (decomp.phi_train.rows() == 0) {
    return decomp.phi_test.norm() <= threshold;
  }
  Eigen::JacobiSVD<Matrix> svd(decomp.phi_train);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()[i] > threshold) ++rank;
  }
  return rank == decomp.rank;
}

Case2Terms case2_terms(const ProblemData& data, const FeatureDecomposition& decomp) {
  Case2Terms terms;
  terms.span_ok = span_condition(decomp);
  if (!terms.span_ok) return terms;

  NoiseCholesky chol(gram_matrix(data.kw, data.inputs));
  const Matrix a = chol.factor_solve(decomp.phi_train);  // R^{-1} Phi_{1:N}
  const Vector y_w = chol.factor_solve(data.outputs);    // R^{-1} y
  const Matrix h = a.transpose() * a;                    // Phi^T Kw^{-1} Phi
  const Vector b = a.transpose() * y_w;                  // Phi^T Kw^{-1} y

  Eigen::LLT<Matrix> h_llt(h);
  if (decomp.rank > 0 && h_llt.info() != Eigen::Success) {
    throw BoundError(ErrorKind::NumericalBreakdown,
                     "case 2: Phi^T Kw^{-1} Phi is not invertible");
  }

  const Vector phi_test = decomp.phi_test.transpose();
  terms.theta_mu = decomp.rank > 0 ? Vector(h_llt.solve(b)) : Vector(Vector::Zero(0));
  terms.p_phi = decomp.rank > 0 ? Vector(h_llt.solve(phi_test)) : Vector(Vector::Zero(0));
  terms.ls_value = decomp.phi_test.dot(terms.theta_mu);
  terms.phi_p_norm = std::sqrt(std::max(phi_test.dot(terms.p_phi), 0.0));

  const double data_misfit = y_w.squaredNorm() - terms.theta_mu.dot(b);
  terms.radicand = data.gamma_w_sq - data_misfit;
  const double tol = 1e-8 * (data.gamma_w_sq + std::abs(data_misfit));
  if (terms.radicand < -tol) {
    throw BoundError(ErrorKind::HypothesisFalsified,
                     "case 2: the noise budget cannot explain the data", terms.radicand);
  }
  terms.radicand = std::max(terms.radicand, 0.0);
  return terms;
}

Vector case2_theta_star(const Case2Terms& terms, Side side) {
  if (terms.phi_p_norm <= 0.0) return terms.theta_mu;
  return terms.theta_mu +
         side_sign(side) * (std::sqrt(terms.radicand) / terms.phi_p_norm) * terms.p_phi;
}

double case2_value(const Case2Terms& terms, Side side) {
  return terms.ls_value + side_sign(side) * terms.phi_p_norm * std::sqrt(terms.radicand);
}

}  // namespace

const char* to_string(CaseLabel label) {
  switch (label) {
    case CaseLabel::Case1_SigmaInf: return "case1";
    case CaseLabel::Case2_SigmaZero: return "case2";
    case CaseLabel::Case3_Interior: return "case3";
    case CaseLabel::Case1And2_Tie: return "case1and2";
    case CaseLabel::Degenerate_ZeroFeature: return "degenerate";
  }
  return "unknown";
}

double relaxed_upper(const ProblemData& data, double sigma, const PointRef& query) {
  return relaxed_value(posterior_state(data, sigma, query), Side::Upper);
}

double relaxed_lower(const ProblemData& data, double sigma, const PointRef& query) {
  return relaxed_value(posterior_state(data, sigma, query), Side::Lower);
}

bool case1_feasible(const ProblemData& data, const PointRef& query, Side side) {
  const double k_star_star = data.kf(query, query);
  if (!(k_star_star > 0.0)) {
    throw BoundError(ErrorKind::InvalidInput,
                     "case 1: kf(query, query) must be positive (degenerate query)",
                     k_star_star);
  }
  if (data.size() == 0) return true;
  const Vector k_star = gram_column(data.kf, data.inputs, query);
  const Vector residual =
      data.outputs -
      side_sign(side) * k_star * (std::sqrt(data.gamma_f_sq) / std::sqrt(k_star_star));
  NoiseCholesky chol(gram_matrix(data.kw, data.inputs));
  return chol.weighted_sq_norm(residual) <= data.gamma_w_sq;
}

double case1_bound(const ProblemData& data, const PointRef& query, Side side) {
  const double k_star_star = data.kf(query, query);
  return side_sign(side) * std::sqrt(std::max(k_star_star, 0.0) * data.gamma_f_sq);
}

bool case2_feasible(const ProblemData& data, const PointRef& query,
                    const FeatureDecomposition& decomp, Side side) {
  (void)query;
  const Case2Terms terms = case2_terms(data, decomp);
  if (!terms.span_ok) return false;
  return case2_theta_star(terms, side).squaredNorm() <= data.gamma_f_sq;
}

double case2_bound(const ProblemData& data, const PointRef& query,
                   const FeatureDecomposition& decomp, Side side) {
  (void)query;
  const Case2Terms terms = case2_terms(data, decomp);
  if (!terms.span_ok) {
    throw BoundError(ErrorKind::InvalidInput,
                     "case 2: query features are not in the span of the training features");
  }
  return case2_value(terms, side);
}

bool corollary_feasible(const ProblemData& data, Eigen::Index train_index, Side side) {
  if (train_index < 0 || train_index >= data.size()) {
    throw BoundError(ErrorKind::InvalidInput, "corollary: train_index out of range",
                     static_cast<double>(train_index));
  }
  const Matrix kf = gram_matrix(data.kf, data.inputs);
  Eigen::LLT<Matrix> llt(kf);
  if (llt.info() != Eigen::Success) {
    throw BoundError(ErrorKind::NotPD, "corollary: Kf must be invertible");
  }
  const Point x_k = data.inputs.row(train_index).transpose();
  const Vector kw_col = gram_column(data.kw, data.inputs, x_k);
  const double kw_kk = kw_col[train_index];
  const Vector shifted =
      data.outputs +
      side_sign(side) * kw_col * (std::sqrt(data.gamma_w_sq) / std::sqrt(kw_kk));
  return shifted.dot(llt.solve(shifted)) <= data.gamma_f_sq;
}

double corollary_bound(const ProblemData& data, Eigen::Index train_index, Side side) {
  if (train_index < 0 || train_index >= data.size()) {
    throw BoundError(ErrorKind::InvalidInput, "corollary: train_index out of range",
                     static_cast<double>(train_index));
  }
  const Point x_k = data.inputs.row(train_index).transpose();
  const double kw_kk = data.kw(x_k, x_k);
  return data.outputs[train_index] +
         side_sign(side) * std::sqrt(kw_kk * data.gamma_w_sq);
}

BoundSolver::BoundSolver(ProblemData data, SigmaOptimizerConfig cfg)
    : data_(std::move(data)),
      cfg_(std::move(cfg)),
      sweep_(data_),
      noise_chol_(gram_matrix(data_.kw, data_.inputs)),
      kf_train_(gram_matrix(data_.kf, data_.inputs)) {
  const Eigen::Index n = data_.size();
  kw_diag_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    kw_diag_[i] = data_.kw(data_.inputs.row(i).transpose(), data_.inputs.row(i).transpose());
  }
  if (n > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(kf_train_);
    if (eig.info() != Eigen::Success) {
      throw BoundError(ErrorKind::NumericalBreakdown, "Kf eigendecomposition failed");
    }
    train_vecs_ = eig.eigenvectors();
    train_vals_ = eig.eigenvalues();
    lambda_max_train_ = train_vals_.maxCoeff();
    kf_llt_.compute(kf_train_);
    kf_invertible_ = kf_llt_.info() == Eigen::Success &&
                     train_vals_.minCoeff() > rank_tolerance(lambda_max_train_);
  }
}

bool BoundSolver::span_gate(const Vector& k_star, double k_star_star) const {
  // Cheap check whether appending the query row can leave the numerical rank
  // unchanged: Schur complement of the query in the (N+1)-point kernel
  // matrix, computed in the training eigenbasis.
  const double scale = std::max(lambda_max_train_, k_star_star);
  if (data_.size() == 0) return k_star_star <= 10.0 * rank_tolerance(scale);
  const double tol = rank_tolerance(lambda_max_train_);
  const Vector projected = train_vecs_.transpose() * k_star;
  double explained = 0.0;
  for (Eigen::Index i = 0; i < train_vals_.size(); ++i) {
    if (train_vals_[i] > tol) explained += projected[i] * projected[i] / train_vals_[i];
  }
  return k_star_star - explained <= 10.0 * rank_tolerance(scale);
}

const FeatureDecomposition& BoundSolver::full_decomposition(
    const PointRef& query, std::optional<FeatureDecomposition>& decomp) const {
  if (!decomp.has_value()) {
    const Eigen::Index n = data_.size();
    Matrix kf_full(n + 1, n + 1);
    kf_full.topLeftCorner(n, n) = kf_train_;
    const Vector k_star = gram_column(data_.kf, data_.inputs, query);
    kf_full.topRightCorner(n, 1) = k_star;
    kf_full.bottomLeftCorner(1, n) = k_star.transpose();
    kf_full(n, n) = data_.kf(query, query);
    decomp = feature_decompose(kf_full);
  }
  return *decomp;
}

BoundSolver::SideOutcome BoundSolver::solve_side(
    const PointRef& query, const Vector& k_star, double k_star_star, Eigen::Index train_idx,
    const SigmaSweep::QueryCache& qc, std::optional<FeatureDecomposition>& decomp,
    Side side) const {
  SideOutcome outcome;
  const double sign = side_sign(side);

  // Case 1 feasibility: the data-independent worst-case latent function must
  // leave a residual the noise budget can interpolate.
  bool c1 = false;
  if (data_.size() == 0) {
    c1 = true;
  } else {
    const Vector residual =
        data_.outputs - sign * k_star * (std::sqrt(data_.gamma_f_sq) / std::sqrt(k_star_star));
    c1 = noise_chol_.weighted_sq_norm(residual) <= data_.gamma_w_sq;
  }

  // Case 2 / Corollary 1 feasibility. The sigma -> 0 closed form is only
  // trusted when the rank deficiency is structural (duplicated query row or a
  // genuinely finite-dimensional kernel); a merely ill-conditioned kernel
  // matrix routes to the interior search, which stays valid at any sigma.
  bool c2 = false;
  double c2_value = 0.0;
  if (train_idx >= 0 && kf_invertible_) {
    const Vector kw_col = gram_column(data_.kw, data_.inputs,
                                      data_.inputs.row(train_idx).transpose());
    const double kw_kk = kw_diag_[train_idx];
    const Vector shifted =
        data_.outputs + sign * kw_col * (std::sqrt(data_.gamma_w_sq) / std::sqrt(kw_kk));
    if (shifted.dot(kf_llt_.solve(shifted)) <= data_.gamma_f_sq) {
      c2 = true;
      c2_value = data_.outputs[train_idx] + sign * std::sqrt(kw_kk * data_.gamma_w_sq);
    }
  } else if (span_gate(k_star, k_star_star)) {
    const FeatureDecomposition& full = full_decomposition(query, decomp);
    const double s_max = full.singular_values[0];
    const double discarded = full.singular_values.tail(full.singular_values.size() - full.rank).sum();
    const bool structural =
        discarded <= 1e-12 * static_cast<double>(full.singular_values.size()) * s_max;
    if (structural) {
      try {
        const Case2Terms terms = case2_terms(data_, full);
        if (terms.span_ok &&
            case2_theta_star(terms, side).squaredNorm() <= data_.gamma_f_sq) {
          c2 = true;
          c2_value = case2_value(terms, side);
        }
      } catch (const BoundError& err) {
        if (err.kind() == ErrorKind::HypothesisFalsified) throw;
        // Numerical breakdown on a borderline span decision: fall through to
        // the interior search.
      }
    }
  }

  if (c1 && c2) {
    outcome.value = sign * std::sqrt(k_star_star * data_.gamma_f_sq);
    outcome.sigma_star = kInf;
    outcome.label = CaseLabel::Case1And2_Tie;
    return outcome;
  }
  if (c1) {
    outcome.value = sign * std::sqrt(k_star_star * data_.gamma_f_sq);
    outcome.sigma_star = kInf;
    outcome.label = CaseLabel::Case1_SigmaInf;
    return outcome;
  }
  if (c2) {
    outcome.value = c2_value;
    outcome.sigma_star = 0.0;
    outcome.label = CaseLabel::Case2_SigmaZero;
    return outcome;
  }

  // Case 3: scalar search over t = log10(sigma). Any feasible probe yields a
  // valid bound, so the best value seen anywhere is returned.
  double best_f = kInf;
  double best_t = 0.5 * (cfg_.log_sigma_min + cfg_.log_sigma_max);
  bool any_feasible = false;
  std::vector<SigmaProbe> probes;
  int evaluations = 0;

  const auto objective = [&](double t) {
    const double sigma = std::pow(10.0, t);
    ++evaluations;
    const double beta_sq_value = sweep_.beta_sq(sigma);
    probes.push_back({sigma, beta_sq_value});
    if (beta_sq_value < 0.0) return kInf;
    any_feasible = true;
    const double value = sweep_.mean(qc, sigma) +
                         sign * std::sqrt(beta_sq_value) * std::sqrt(sweep_.var(qc, sigma));
    const double objective_value = sign * value;  // minimize upper, maximize lower
    if (objective_value < best_f) {
      best_f = objective_value;
      best_t = t;
    }
    return objective_value;
  };

  const double lo = cfg_.log_sigma_min;
  const double hi = cfg_.log_sigma_max;
  objective(lo);
  objective(hi);

  std::vector<double> seeds;
  for (double s : cfg_.multistart) {
    if (s > lo && s < hi) seeds.push_back(s);
  }
  std::sort(seeds.begin(), seeds.end());
  std::vector<double> edges{lo};
  for (size_t i = 0; i + 1 < seeds.size(); ++i) {
    edges.push_back(0.5 * (seeds[i] + seeds[i + 1]));
  }
  edges.push_back(hi);
  if (seeds.empty()) edges = {lo, hi};

  bool converged = true;
  for (size_t i = 0; i + 1 < edges.size(); ++i) {
    const auto result = minimize_scalar(objective, edges[i], edges[i + 1], cfg_.tol,
                                        cfg_.max_iters);
    converged = converged && result.converged;
  }

  if (!any_feasible) {
    const auto diag = classify_falsification(data_, probes);
    throw BoundError(ErrorKind::HypothesisFalsified, describe(diag), diag.min_violation);
  }

  outcome.value = sign * best_f;
  outcome.sigma_star = std::pow(10.0, best_t);
  outcome.label = CaseLabel::Case3_Interior;
  outcome.probes = evaluations;
  outcome.converged = converged;
  return outcome;
}

BoundResult BoundSolver::at(const PointRef& query) const {
  if (query.size() != data_.dim() && data_.size() > 0) {
    throw BoundError(ErrorKind::InvalidInput, "query dimension mismatch",
                     static_cast<double>(query.size()));
  }
  const double k_star_star = data_.kf(query, query);
  const Vector k_star = gram_column(data_.kf, data_.inputs, query);
  const double scale = std::max(lambda_max_train_, k_star_star);

  BoundResult result;
  if (k_star_star <= rank_tolerance(scale)) {
    // Phi_{N+1} = 0: the latent function vanishes at the query for the whole
    // hypothesis class.
    result.upper = 0.0;
    result.lower = 0.0;
    result.sigma_star_upper = std::numeric_limits<double>::quiet_NaN();
    result.sigma_star_lower = std::numeric_limits<double>::quiet_NaN();
    result.case_upper = CaseLabel::Degenerate_ZeroFeature;
    result.case_lower = CaseLabel::Degenerate_ZeroFeature;
    return result;
  }

  const Eigen::Index train_idx = matching_train_index(data_, query);
  const auto qc = sweep_.make_query_cache(query);
  std::optional<FeatureDecomposition> decomp;

  const SideOutcome upper = solve_side(query, k_star, k_star_star, train_idx, qc, decomp,
                                       Side::Upper);
  const SideOutcome lower = solve_side(query, k_star, k_star_star, train_idx, qc, decomp,
                                       Side::Lower);

  result.upper = upper.value;
  result.lower = lower.value;
  result.sigma_star_upper = upper.sigma_star;
  result.sigma_star_lower = lower.sigma_star;
  result.case_upper = upper.label;
  result.case_lower = lower.label;
  result.relaxed_probe_count = upper.probes + lower.probes;
  result.optimizer_converged = upper.converged && lower.converged;
  return result;
}

std::pair<double, double> BoundSolver::relaxed_at(const PointRef& query, double sigma) const {
  const auto qc = sweep_.make_query_cache(query);
  const PosteriorState state = sweep_.state(qc, sigma);
  if (state.beta_sq < 0.0) {
    throw BoundError(ErrorKind::HypothesisFalsified,
                     "beta^2 < 0 at this sigma; the relaxation is uninformative here",
                     state.beta_sq);
  }
  const double half_width = std::sqrt(state.beta_sq) * std::sqrt(state.var_at_query);
  return {state.mean_at_query - half_width, state.mean_at_query + half_width};
}

BoundResult optimal_bound(const ProblemData& data, const PointRef& query,
                          const SigmaOptimizerConfig& cfg) {
  return BoundSolver(data, cfg).at(query);
}

std::vector<EnvelopeEntry> envelope(const ProblemData& data, const Matrix& queries,
                                    const SigmaOptimizerConfig& cfg) {
  const BoundSolver solver(data, cfg);
  std::vector<EnvelopeEntry> entries(static_cast<size_t>(queries.rows()));
  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    auto& entry = entries[static_cast<size_t>(i)];
    try {
      entry.result = solver.at(queries.row(i).transpose());
      entry.ok = true;
    } catch (const BoundError& err) {
      entry.ok = false;
      entry.error_kind = err.kind();
      entry.error = err.what();
    }
  }
  return entries;
}

}  // namespace rkhsbound
