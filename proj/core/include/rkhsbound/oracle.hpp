#pragma once

#include "rkhsbound/bounds.hpp"

namespace rkhsbound {

// Finite-dimensional two-ellipsoid program the bound reduces to:
//   sup_theta  phi_test . theta
//   s.t.       ||theta||^2 <= gamma_f_sq
//              (y - phi_train theta)^T kw^{-1} (y - phi_train theta) <= gamma_w_sq
struct QcqpInstance {
  Matrix phi_train;  // N x r
  Vector phi_test;   // length r
  Matrix kw;         // N x N positive definite
  Vector y;          // length N
  double gamma_f_sq = 1.0;
  double gamma_w_sq = 1.0;
};

QcqpInstance make_qcqp_instance(const ProblemData& data, const PointRef& query);

struct OracleConfig {
  double gap_tol = 1e-6;      // relative to 1 + |dual value|
  int grid_points = 25;       // per multiplier axis, log-spaced
  double lambda_min = 1e-8;
  double lambda_max = 1e8;
  int refine_sweeps = 80;     // coordinate-descent sweeps over the multipliers
  int projection_iters = 200; // alternating projections for the primal point
};

struct OracleResult {
  double value = 0.0;         // certified outer (dual) value
  double primal_value = 0.0;  // objective of the feasible inner point
  double gap = 0.0;           // value - primal_value
  Vector theta;               // feasible primal point
  double lambda_f = 0.0;
  double lambda_w = 0.0;
};

// Brute-force certification of the bound, independent of the sigma
// parametrization: dual minimized over a 2-D multiplier grid plus coordinate
// descent, primal recovered by alternating projections. Throws
// OracleInconclusive when the duality gap stays above gap_tol.
OracleResult oracle_upper(const QcqpInstance& inst, const OracleConfig& cfg = OracleConfig{});
OracleResult oracle_lower(const QcqpInstance& inst, const OracleConfig& cfg = OracleConfig{});

// Randomized bound-vs-oracle equivalence study, also behind the oracle-check
// CLI command.
struct OracleCheckConfig {
  int instances = 200;
  uint64_t seed = 1;
  int n_min = 1;
  int n_max = 10;
  double budget_min = 0.1;
  double budget_max = 10.0;
  double train_point_query_fraction = 0.2;
  OracleConfig oracle;
  SigmaOptimizerConfig optimizer;
};

struct OracleCheckRecord {
  int instance = 0;
  int n = 0;
  std::string kf_kind;
  std::string kw_kind;
  double bound_upper = 0.0, oracle_upper = 0.0;
  double bound_lower = 0.0, oracle_lower = 0.0;
  double rel_diff_upper = 0.0, rel_diff_lower = 0.0;
  double gap_upper = 0.0, gap_lower = 0.0;
  CaseLabel case_upper = CaseLabel::Case3_Interior;
  double sigma_star_upper = 0.0;
  double sigma_from_multipliers = 0.0;  // sqrt(lambda_f / lambda_w)
  bool ok = true;
  std::string error;
};

struct OracleCheckResult {
  std::vector<OracleCheckRecord> records;
  double max_rel_diff = 0.0;
  double max_gap = 0.0;
  int failures = 0;
};

OracleCheckResult run_oracle_check(const OracleCheckConfig& cfg);

}  // namespace rkhsbound
