#include "rkhsbound/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "rkhsbound/scalar_min.hpp"
#include "rkhsbound/synth.hpp"

namespace rkhsbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// All dual/projection work happens in the eigenbasis of
// H = Phi^T Kw^{-1} Phi, where every inner solve is O(r).
struct DualWorkspace {
  Vector d;          // eigenvalues of H, ascending
  Vector phi_t;      // Q^T phi_test
  Vector b_t;        // Q^T Phi^T Kw^{-1} y
  Matrix q;          // eigenvectors of H
  double y_w_sq = 0; // y^T Kw^{-1} y
  double gamma_f_sq = 0;
  double gamma_w_sq = 0;

  double misfit(const Vector& theta_t) const {
    return y_w_sq - 2.0 * b_t.dot(theta_t) + theta_t.dot(d.cwiseProduct(theta_t));
  }
};

DualWorkspace make_workspace(const QcqpInstance& inst) {
  DualWorkspace w;
  NoiseCholesky chol(inst.kw);
  const Matrix a = chol.factor_solve(inst.phi_train);
  const Vector y_w = chol.factor_solve(inst.y);
  Matrix h = a.transpose() * a;
  h = 0.5 * (h + h.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  if (eig.info() != Eigen::Success) {
    throw BoundError(ErrorKind::NumericalBreakdown, "oracle: eigendecomposition of H failed");
  }
  w.d = eig.eigenvalues().cwiseMax(0.0);
  w.q = eig.eigenvectors();
  w.phi_t = w.q.transpose() * inst.phi_test;
  w.b_t = w.q.transpose() * (a.transpose() * y_w);
  w.y_w_sq = y_w.squaredNorm();
  w.gamma_f_sq = inst.gamma_f_sq;
  w.gamma_w_sq = inst.gamma_w_sq;
  return w;
}

Vector inner_maximizer(const DualWorkspace& w, double lf, double lw) {
  Vector theta(w.d.size());
  for (Eigen::Index i = 0; i < w.d.size(); ++i) {
    theta[i] = (w.phi_t[i] + 2.0 * lw * w.b_t[i]) / (2.0 * lf + 2.0 * lw * w.d[i]);
  }
  return theta;
}

double dual_value(const DualWorkspace& w, double lf, double lw) {
  const Vector theta = inner_maximizer(w, lf, lw);
  return w.phi_t.dot(theta) - lf * (theta.squaredNorm() - w.gamma_f_sq) -
         lw * (w.misfit(theta) - w.gamma_w_sq);
}

// Euclidean projection onto {theta : misfit(theta) <= gamma_w_sq}, solved on
// the nu-path theta(nu) = (I + nu H)^{-1} (theta0 + nu b) by bisection.
Vector project_misfit(const DualWorkspace& w, const Vector& theta0) {
  if (w.misfit(theta0) <= w.gamma_w_sq) return theta0;
  const auto theta_at = [&](double nu) {
    Vector theta(w.d.size());
    for (Eigen::Index i = 0; i < w.d.size(); ++i) {
      theta[i] = (theta0[i] + nu * w.b_t[i]) / (1.0 + nu * w.d[i]);
    }
    return theta;
  };
  double lo = 0.0, hi = 1.0;
  int expansions = 0;
  while (w.misfit(theta_at(hi)) > w.gamma_w_sq && expansions < 200) {
    hi *= 4.0;
    ++expansions;
  }
  if (expansions == 200) {
    throw BoundError(ErrorKind::OracleInconclusive,
                     "oracle: misfit constraint appears infeasible during projection");
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (w.misfit(theta_at(mid)) > w.gamma_w_sq) lo = mid; else hi = mid;
  }
  return theta_at(hi);
}

Vector project_ball(const Vector& theta, double gamma_f_sq) {
  const double norm_sq = theta.squaredNorm();
  if (norm_sq <= gamma_f_sq) return theta;
  return theta * std::sqrt(gamma_f_sq / norm_sq);
}

// Least-squares-toward-feasible construction along the ridge path
// (H + rho I)^{-1} b; returns a strictly feasible point when one is found.
bool find_slater_point(const DualWorkspace& w, Vector* out) {
  const double scale = std::max(w.d.size() > 0 ? w.d.maxCoeff() : 0.0, 1.0);
  for (double rho = 1e-12 * scale; rho <= 1e12 * scale; rho *= 4.0) {
    Vector theta(w.d.size());
    for (Eigen::Index i = 0; i < w.d.size(); ++i) {
      theta[i] = w.b_t[i] / (w.d[i] + rho);
    }
    if (theta.squaredNorm() < w.gamma_f_sq && w.misfit(theta) < w.gamma_w_sq) {
      if (out) *out = theta;
      return true;
    }
  }
  return false;
}

OracleResult solve_upper(const QcqpInstance& inst, const OracleConfig& cfg) {
  DualWorkspace w = make_workspace(inst);

  if (!find_slater_point(w, nullptr)) {
    throw BoundError(ErrorKind::OracleInconclusive,
                     "oracle: no strictly feasible point found (Slater check failed)");
  }

  const double log_min = std::log10(cfg.lambda_min);
  const double log_max = std::log10(cfg.lambda_max);

  // Coarse grid over the multipliers.
  double best_lf = 1.0, best_lw = 1.0, best_g = kInf;
  for (int i = 0; i < cfg.grid_points; ++i) {
    const double lf = std::pow(
        10.0, log_min + (log_max - log_min) * i / std::max(cfg.grid_points - 1, 1));
    for (int j = 0; j < cfg.grid_points; ++j) {
      const double lw = std::pow(
          10.0, log_min + (log_max - log_min) * j / std::max(cfg.grid_points - 1, 1));
      const double g = dual_value(w, lf, lw);
      if (g < best_g) {
        best_g = g;
        best_lf = lf;
        best_lw = lw;
      }
    }
  }

  // Coordinate descent; the dual is convex, hence unimodal per coordinate in
  // log space.
  for (int sweep = 0; sweep < cfg.refine_sweeps; ++sweep) {
    const double before = best_g;
    const double lw_fixed = best_lw;
    auto rf = minimize_scalar(
        [&](double t) { return dual_value(w, std::pow(10.0, t), lw_fixed); }, log_min,
        log_max, 1e-12, 200);
    best_lf = std::pow(10.0, rf.x);
    const double lf_fixed = best_lf;
    auto rw = minimize_scalar(
        [&](double t) { return dual_value(w, lf_fixed, std::pow(10.0, t)); }, log_min,
        log_max, 1e-12, 200);
    best_lw = std::pow(10.0, rw.x);
    best_g = rw.fx;
    if (std::abs(before - best_g) <= 1e-14 * (1.0 + std::abs(best_g))) break;
  }

  // Feasible primal point from the dual argmax by alternating projections.
  Vector theta = inner_maximizer(w, best_lf, best_lw);
  for (int iter = 0; iter < cfg.projection_iters; ++iter) {
    const Vector projected = project_misfit(w, project_ball(theta, w.gamma_f_sq));
    const bool ball_ok = projected.squaredNorm() <= w.gamma_f_sq * (1.0 + 1e-12) + 1e-300;
    theta = projected;
    if (ball_ok) break;
  }
  theta = project_ball(theta, w.gamma_f_sq);
  double primal = w.phi_t.dot(theta);
  Vector slater;
  if (w.misfit(theta) > w.gamma_w_sq * (1.0 + 1e-9) + 1e-12) {
    // Projection cycling on a thin intersection: fall back to the Slater point.
    find_slater_point(w, &slater);
    if (slater.size() == theta.size() && w.phi_t.dot(slater) > primal) {
      theta = slater;
      primal = w.phi_t.dot(theta);
    }
  }

  OracleResult result;
  result.value = best_g;
  result.primal_value = primal;
  result.gap = best_g - primal;
  result.theta = w.q * theta;
  result.lambda_f = best_lf;
  result.lambda_w = best_lw;
  if (!(result.gap <= cfg.gap_tol * (1.0 + std::abs(result.value)))) {
    throw BoundError(ErrorKind::OracleInconclusive, "oracle: duality gap above tolerance",
                     result.gap);
  }
  return result;
}

}  // namespace

QcqpInstance make_qcqp_instance(const ProblemData& data, const PointRef& query) {
  const Eigen::Index n = data.size();
  Matrix kf_full(n + 1, n + 1);
  kf_full.topLeftCorner(n, n) = gram_matrix(data.kf, data.inputs);
  const Vector k_star = gram_column(data.kf, data.inputs, query);
  kf_full.topRightCorner(n, 1) = k_star;
  kf_full.bottomLeftCorner(1, n) = k_star.transpose();
  kf_full(n, n) = data.kf(query, query);

  const FeatureDecomposition decomp = feature_decompose(kf_full);
  QcqpInstance inst;
  inst.phi_train = decomp.phi_train;
  inst.phi_test = decomp.phi_test.transpose();
  inst.kw = gram_matrix(data.kw, data.inputs);
  inst.y = data.outputs;
  inst.gamma_f_sq = data.gamma_f_sq;
  inst.gamma_w_sq = data.gamma_w_sq;
  return inst;
}

OracleResult oracle_upper(const QcqpInstance& inst, const OracleConfig& cfg) {
  return solve_upper(inst, cfg);
}

OracleResult oracle_lower(const QcqpInstance& inst, const OracleConfig& cfg) {
  QcqpInstance negated = inst;
  negated.phi_test = -inst.phi_test;
  OracleResult mirrored = solve_upper(negated, cfg);
  OracleResult result;
  result.value = -mirrored.value;
  result.primal_value = -mirrored.primal_value;
  result.gap = mirrored.gap;
  result.theta = mirrored.theta;
  result.lambda_f = mirrored.lambda_f;
  result.lambda_w = mirrored.lambda_w;
  return result;
}

OracleCheckResult run_oracle_check(const OracleCheckConfig& cfg) {
  OracleCheckResult out;
  std::mt19937_64 seeder(cfg.seed);

  for (int i = 0; i < cfg.instances; ++i) {
    OracleCheckRecord rec;
    rec.instance = i;
    const uint64_t instance_seed = derive_seed(cfg.seed, static_cast<uint64_t>(i));
    std::mt19937_64 rng(instance_seed);
    try {
      std::uniform_int_distribution<int> n_dist(cfg.n_min, cfg.n_max);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const int n = n_dist(rng);
      rec.n = n;

      KernelSpec kf = KernelSpec::dirac();
      if (unit(rng) < 0.5) {
        kf = KernelSpec::squared_exponential(0.5 + 1.5 * unit(rng));
        rec.kf_kind = "se";
      } else {
        kf = KernelSpec::polynomial(1 + static_cast<int>(3.0 * unit(rng)));
        rec.kf_kind = "poly";
      }
      KernelSpec kw = KernelSpec::dirac();
      if (unit(rng) < 0.5) {
        rec.kw_kind = "dirac";
      } else {
        kw = KernelSpec::squared_exponential(0.5 + 1.5 * unit(rng));
        rec.kw_kind = "se";
      }

      const double log_lo = std::log(cfg.budget_min), log_hi = std::log(cfg.budget_max);
      const double gamma_f_sq = std::exp(log_lo + (log_hi - log_lo) * unit(rng));
      const double gamma_w_sq = std::exp(log_lo + (log_hi - log_lo) * unit(rng));

      // Distinct inputs with a minimum spacing so the SE noise Gram stays
      // well-conditioned at oracle scale.
      Matrix inputs(n, 1);
      for (int k = 0; k < n; ++k) {
        bool ok = false;
        while (!ok) {
          const double candidate = 4.0 * unit(rng);
          ok = true;
          for (int j = 0; j < k; ++j) {
            if (std::abs(inputs(j, 0) - candidate) < 2e-2) ok = false;
          }
          if (ok) inputs(k, 0) = candidate;
        }
      }

      // Feasible instance: latent function and noise strictly inside their
      // budgets, so Slater's condition holds.
      Box domain{Vector::Constant(1, 0.0), Vector::Constant(1, 4.0)};
      const RkhsSample f = sample_rkhs_function(kf, domain, std::max(2 * n, 8),
                                                0.8 * gamma_f_sq, rng());
      NoiseCholesky kw_chol(gram_matrix(kw, inputs));
      std::normal_distribution<double> gauss(0.0, 1.0);
      Vector raw(n);
      for (int k = 0; k < n; ++k) raw[k] = gauss(rng);
      Vector w_values = kw_chol.factor() * raw;
      const double w_norm_sq = kw_chol.weighted_sq_norm(w_values);
      if (w_norm_sq > 0.0) {
        w_values *= std::sqrt(0.8 * gamma_w_sq / w_norm_sq);
      }
      Vector y(n);
      for (int k = 0; k < n; ++k) {
        y[k] = f.eval(inputs.row(k).transpose()) + w_values[k];
      }
      const ProblemData data =
          make_problem_data(inputs, y, kf, kw, gamma_f_sq, gamma_w_sq);

      Point query(1);
      if (unit(rng) < cfg.train_point_query_fraction) {
        query[0] = inputs(static_cast<Eigen::Index>(unit(rng) * n) % n, 0);
      } else {
        query[0] = 4.0 * unit(rng);
      }

      const BoundResult bound = optimal_bound(data, query, cfg.optimizer);
      const QcqpInstance inst = make_qcqp_instance(data, query);
      const OracleResult up = oracle_upper(inst, cfg.oracle);
      const OracleResult low = oracle_lower(inst, cfg.oracle);

      rec.bound_upper = bound.upper;
      rec.bound_lower = bound.lower;
      rec.oracle_upper = up.value;
      rec.oracle_lower = low.value;
      rec.rel_diff_upper = std::abs(bound.upper - up.value) / (1.0 + std::abs(up.value));
      rec.rel_diff_lower = std::abs(bound.lower - low.value) / (1.0 + std::abs(low.value));
      rec.gap_upper = up.gap / (1.0 + std::abs(up.value));
      rec.gap_lower = low.gap / (1.0 + std::abs(low.value));
      rec.case_upper = bound.case_upper;
      rec.sigma_star_upper = bound.sigma_star_upper;
      rec.sigma_from_multipliers = std::sqrt(up.lambda_f / up.lambda_w);

      out.max_rel_diff = std::max({out.max_rel_diff, rec.rel_diff_upper, rec.rel_diff_lower});
      out.max_gap = std::max({out.max_gap, rec.gap_upper, rec.gap_lower});
    } catch (const BoundError& err) {
      rec.ok = false;
      rec.error = err.what();
      ++out.failures;
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace rkhsbound
