#pragma once

#include <string>

#include "rkhsbound/baselines.hpp"
#include "rkhsbound/synth.hpp"

namespace rkhsbound {

// ---------------------------------------------------------------------------
// Uncertainty-area comparison: optimal bound vs relaxed (sigma = eps) vs the
// high-probability baseline, over a schedule of data-set sizes.

struct AreaComparisonConfig {
  std::vector<int> n_schedule = {1, 2, 5, 10, 20, 50, 100, 200};
  int trials = 100;
  double domain_lo = 0.0;
  double domain_hi = 4.0;
  double lengthscale = 1.0;
  double epsilon = 0.01;
  double confidence_p = 0.99;
  double gamma_f_sq = 1.0;
  int query_grid = 200;
  int rkhs_centers = 50;
  uint64_t master_seed = 1;
  int threads = 0;  // 0 = hardware concurrency
  double failure_budget = 0.05;
  SigmaOptimizerConfig optimizer;
};

struct AreaTrialReport {
  int n = 0;
  int trial = 0;
  double area_optimal = 0.0;
  double area_relaxed_eps = 0.0;
  double area_prob = 0.0;
  bool contained_optimal = false;
  bool contained_relaxed = false;
  bool contained_prob = false;
  double time_optimal = 0.0;  // seconds, whole query grid
  double time_relaxed = 0.0;
  double time_prob = 0.0;
  bool ok = true;
  std::string error;
};

struct AreaComparisonResult {
  std::vector<AreaTrialReport> reports;
  int failures = 0;
  bool degraded = false;  // failures exceeded the budget share
};

AreaComparisonResult run_area_comparison(const AreaComparisonConfig& cfg);

// ---------------------------------------------------------------------------
// Safe control under a one-step barrier constraint x+ >= (1 - gamma) x.

struct ControlProblem {
  double gamma = 0.95;
  double omega = 1e4;  // slack penalty
  double u_min = -2.0;
  double u_max = 2.0;
  double lengthscale = 0.07071067811865475;  // sqrt(2) / 20

  double known(double x, double u) const { return 0.5 * x + u - 1.0; }
  double residual(double x) const { return std::exp(-x * x) * std::sin(10.0 * x); }
  double cost(double x, double u, double mean) const {
    const double predicted = known(x, u) + mean;
    return predicted * predicted + u * u;
  }
};

enum class ControlMethod { DeterministicFull, DeterministicSubset, Probabilistic };
const char* to_string(ControlMethod method);

struct ControlSolve {
  double u = 0.0;
  double sigma = 0.0;
  double slack = 0.0;
  bool feasible = false;  // slack <= 1e-6
  double seconds = 0.0;
};

// Minimizes cost + omega * slack over (u, sigma, slack >= 0) subject to the
// tightened barrier constraint. The deterministic methods treat sigma as a
// decision variable (nested scalar search inside a u grid with local
// refinement); the probabilistic method fixes sigma and uses prob_beta. The
// subset variant keeps only the nearest subset_size training points, with the
// noise budget rescaled to subset_size/N of the original (valid since the
// per-point noise bound carries over to any subset).
ControlSolve solve_safe_control(const ControlProblem& problem, const ProblemData& data,
                                double x_now, ControlMethod method,
                                const SigmaOptimizerConfig& opt = SigmaOptimizerConfig{},
                                const ProbBoundParams& prob_params = ProbBoundParams{},
                                int subset_size = 10);

struct ControlStudyConfig {
  std::vector<int> n_schedule = {10, 30, 100, 300};
  int repetitions = 20;
  int state_grid = 500;
  double state_lo = -2.0;
  double state_hi = 2.0;
  double epsilon = 0.01;
  double confidence_p = 0.99;
  // Strict upper bound on the residual's squared RKHS norm (~5.68 for the
  // default problem at the default lengthscale).
  double gamma_f_sq = 10.0;
  int subset_size = 10;
  uint64_t master_seed = 1;
  int threads = 0;
  double failure_budget = 0.05;
  ControlProblem problem;
  SigmaOptimizerConfig optimizer;
};

struct ControlTrialReport {
  ControlMethod method = ControlMethod::DeterministicFull;
  int n = 0;
  int rep = 0;
  double success_rate = 0.0;  // feasible_count / state_grid
  int feasible_count = 0;
  double time_median = 0.0;   // per-state solve seconds
  double time_p5 = 0.0;
  double time_p95 = 0.0;
  bool safety_ok = true;  // every feasible action passes the true-dynamics check
  bool ok = true;
  std::string error;
};

struct ControlStudyResult {
  std::vector<ControlTrialReport> reports;
  int failures = 0;
  bool degraded = false;
};

ControlStudyResult run_control_study(const ControlStudyConfig& cfg);

// Trapezoid rule for the envelope area on a uniform grid.
double trapezoid_area(const Vector& widths, double spacing);

}  // namespace rkhsbound
