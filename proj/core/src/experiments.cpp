#include "rkhsbound/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <thread>

#include "rkhsbound/scalar_min.hpp"

namespace rkhsbound {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(const Clock::time_point& start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs items [0, count) on a fixed number of threads; items must be
// independent and write only to their own slot.
void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  threads = std::min(std::max(threads, 1), count > 0 ? count : 1);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& worker : pool) worker.join();
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double idx = p * (static_cast<double>(values.size()) - 1.0);
  const size_t lo = static_cast<size_t>(idx);
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = idx - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace

double trapezoid_area(const Vector& widths, double spacing) {
  if (widths.size() < 2) return 0.0;
  double area = 0.5 * (widths[0] + widths[widths.size() - 1]);
  for (Eigen::Index i = 1; i + 1 < widths.size(); ++i) area += widths[i];
  return area * spacing;
}

AreaComparisonResult run_area_comparison(const AreaComparisonConfig& cfg) {
  const int total = static_cast<int>(cfg.n_schedule.size()) * cfg.trials;
  AreaComparisonResult out;
  out.reports.resize(static_cast<size_t>(total));

  const Matrix queries = grid_inputs(cfg.domain_lo, cfg.domain_hi, cfg.query_grid);
  const double spacing = (cfg.domain_hi - cfg.domain_lo) /
                         std::max(cfg.query_grid - 1, 1);
  const Box domain = interval(cfg.domain_lo, cfg.domain_hi);

  parallel_for(total, resolve_threads(cfg.threads), [&](int item) {
    const int n_idx = item / cfg.trials;
    const int trial = item % cfg.trials;
    const int n = cfg.n_schedule[static_cast<size_t>(n_idx)];
    AreaTrialReport report;
    report.n = n;
    report.trial = trial;
    try {
      const uint64_t trial_seed =
          derive_seed(cfg.master_seed, static_cast<uint64_t>(item));
      const KernelSpec kf = KernelSpec::squared_exponential(cfg.lengthscale);
      const RkhsSample f =
          sample_rkhs_function(kf, domain, cfg.rkhs_centers, cfg.gamma_f_sq,
                               derive_seed(trial_seed, 0));
      const Matrix inputs = sample_distinct_inputs(domain, n, derive_seed(trial_seed, 1));
      NoiseModel noise;
      noise.kind = NoiseKind::TruncatedGaussian;
      noise.epsilon = cfg.epsilon;
      noise.seed = derive_seed(trial_seed, 2);
      const ProblemData data = make_dataset(f, noise, inputs);

      const Vector truth = f.eval_rows(queries);
      const Eigen::Index q = queries.rows();

      const BoundSolver solver(data, cfg.optimizer);

      // Optimal (Theorem-1) envelope.
      auto t0 = Clock::now();
      Vector opt_width(q);
      bool opt_contained = true;
      for (Eigen::Index i = 0; i < q; ++i) {
        const BoundResult r = solver.at(queries.row(i).transpose());
        opt_width[i] = r.upper - r.lower;
        opt_contained = opt_contained && truth[i] >= r.lower && truth[i] <= r.upper;
      }
      report.time_optimal = seconds_since(t0);
      report.area_optimal = trapezoid_area(opt_width, spacing);
      report.contained_optimal = opt_contained;

      // Relaxed envelope at sigma = eps.
      t0 = Clock::now();
      Vector rel_width(q);
      bool rel_contained = true;
      for (Eigen::Index i = 0; i < q; ++i) {
        const auto [lo, hi] = solver.relaxed_at(queries.row(i).transpose(), cfg.epsilon);
        rel_width[i] = hi - lo;
        rel_contained = rel_contained && truth[i] >= lo && truth[i] <= hi;
      }
      report.time_relaxed = seconds_since(t0);
      report.area_relaxed_eps = trapezoid_area(rel_width, spacing);
      report.contained_relaxed = rel_contained;

      // High-probability baseline at sigma = eps.
      t0 = Clock::now();
      ProbBoundParams params;
      params.sub_gaussian_R = cfg.epsilon;
      params.confidence_p = cfg.confidence_p;
      params.sigma = cfg.epsilon;
      const double beta = prob_beta(data, params);
      Vector prob_width(q);
      bool prob_contained = true;
      for (Eigen::Index i = 0; i < q; ++i) {
        const auto qc = solver.sweep().make_query_cache(queries.row(i).transpose());
        const PosteriorState state = solver.sweep().state(qc, params.sigma);
        const double half = beta * std::sqrt(state.var_at_query);
        prob_width[i] = 2.0 * half;
        prob_contained = prob_contained && std::abs(truth[i] - state.mean_at_query) <= half;
      }
      report.time_prob = seconds_since(t0);
      report.area_prob = trapezoid_area(prob_width, spacing);
      report.contained_prob = prob_contained;
    } catch (const std::exception& err) {
      report.ok = false;
      report.error = err.what();
    }
    out.reports[static_cast<size_t>(item)] = std::move(report);
  });

  for (const auto& report : out.reports) {
    if (!report.ok) ++out.failures;
  }
  out.degraded = out.failures > cfg.failure_budget * total;
  return out;
}

const char* to_string(ControlMethod method) {
  switch (method) {
    case ControlMethod::DeterministicFull: return "deterministic_full";
    case ControlMethod::DeterministicSubset: return "deterministic_subset";
    case ControlMethod::Probabilistic: return "probabilistic";
  }
  return "unknown";
}

namespace {

ProblemData nearest_subset(const ProblemData& data, double x_now, int subset_size) {
  const Eigen::Index n = data.size();
  const Eigen::Index k = std::min<Eigen::Index>(subset_size, n);
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](Eigen::Index a, Eigen::Index b) {
                      return std::abs(data.inputs(a, 0) - x_now) <
                             std::abs(data.inputs(b, 0) - x_now);
                    });
  Matrix inputs(k, data.inputs.cols());
  Vector y(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    inputs.row(i) = data.inputs.row(order[static_cast<size_t>(i)]);
    y[i] = data.outputs[order[static_cast<size_t>(i)]];
  }
  // Per-point boundedness makes the energy budget restrictable to any subset.
  const double gamma_w_sq = data.gamma_w_sq * static_cast<double>(k) / static_cast<double>(n);
  return make_problem_data(std::move(inputs), std::move(y), data.kf, data.kw,
                           data.gamma_f_sq, gamma_w_sq);
}

struct TightenedObjective {
  // cost(x, u, mean) + omega * max(0, (1-gamma) x - known(x,u) - lower_bound)
  double cost = 0.0;
  double slack = 0.0;
};

}  // namespace

ControlSolve solve_safe_control(const ControlProblem& problem, const ProblemData& data,
                                double x_now, ControlMethod method,
                                const SigmaOptimizerConfig& opt,
                                const ProbBoundParams& prob_params, int subset_size) {
  const auto start = Clock::now();
  const ProblemData* active = &data;
  std::optional<ProblemData> subset_data;
  if (method == ControlMethod::DeterministicSubset &&
      data.size() > static_cast<Eigen::Index>(subset_size)) {
    subset_data = nearest_subset(data, x_now, subset_size);
    active = &*subset_data;
  }

  const SigmaSweep sweep(*active);
  Point query(1);
  query[0] = x_now;
  const auto qc = sweep.make_query_cache(query);
  const double barrier = (1.0 - problem.gamma) * x_now;

  double fixed_beta = 0.0;
  if (method == ControlMethod::Probabilistic) {
    fixed_beta = prob_beta(*active, prob_params);
  }

  // Inner evaluation at fixed (u, sigma): cost uses the posterior mean, the
  // slack absorbs any barrier violation of the lower bound.
  const auto evaluate = [&](double u, double sigma) -> TightenedObjective {
    const PosteriorState state = sweep.state(qc, sigma);
    double beta;
    if (method == ControlMethod::Probabilistic) {
      beta = fixed_beta;
    } else {
      if (state.beta_sq < 0.0) {
        return {std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::infinity()};
      }
      beta = std::sqrt(state.beta_sq);
    }
    const double lower = state.mean_at_query - beta * std::sqrt(state.var_at_query);
    const double slack = std::max(0.0, barrier - problem.known(x_now, u) - lower);
    return {problem.cost(x_now, u, state.mean_at_query) + problem.omega * slack, slack};
  };

  const bool optimize_sigma = method != ControlMethod::Probabilistic;
  const double fixed_sigma = prob_params.sigma;

  // For fixed u, minimize over log10(sigma) (deterministic methods only).
  const auto best_sigma_for = [&](double u) -> std::pair<double, double> {
    if (!optimize_sigma) return {evaluate(u, fixed_sigma).cost, fixed_sigma};
    double best_value = std::numeric_limits<double>::infinity();
    double best_t = 0.0;
    const auto objective = [&](double t) {
      const double value = evaluate(u, std::pow(10.0, t)).cost;
      if (value < best_value) {
        best_value = value;
        best_t = t;
      }
      return value;
    };
    const double lo = opt.log_sigma_min;
    const double hi = opt.log_sigma_max;
    objective(lo);
    objective(hi);
    std::vector<double> seeds;
    for (double s : opt.multistart) {
      if (s > lo && s < hi) seeds.push_back(s);
    }
    std::sort(seeds.begin(), seeds.end());
    std::vector<double> edges{lo};
    for (size_t i = 0; i + 1 < seeds.size(); ++i) {
      edges.push_back(0.5 * (seeds[i] + seeds[i + 1]));
    }
    edges.push_back(hi);
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
      minimize_scalar(objective, edges[i], edges[i + 1], 1e-8, opt.max_iters);
    }
    return {best_value, std::pow(10.0, best_t)};
  };

  // Coarse grid over u followed by local refinement around the best point.
  constexpr int kGridPoints = 41;
  double best_cost = std::numeric_limits<double>::infinity();
  double best_u = problem.u_min;
  const double u_spacing = (problem.u_max - problem.u_min) / (kGridPoints - 1);
  for (int i = 0; i < kGridPoints; ++i) {
    const double u = problem.u_min + u_spacing * i;
    const auto [value, sigma] = best_sigma_for(u);
    (void)sigma;
    if (value < best_cost) {
      best_cost = value;
      best_u = u;
    }
  }
  const double refine_lo = std::max(problem.u_min, best_u - u_spacing);
  const double refine_hi = std::min(problem.u_max, best_u + u_spacing);
  const auto refined = minimize_scalar(
      [&](double u) { return best_sigma_for(u).first; }, refine_lo, refine_hi, 1e-9, 100);
  if (refined.fx < best_cost) {
    best_cost = refined.fx;
    best_u = refined.x;
  }

  const auto [final_cost, final_sigma] = best_sigma_for(best_u);
  (void)final_cost;
  const auto final_eval = evaluate(best_u, final_sigma);

  ControlSolve solve;
  solve.u = best_u;
  solve.sigma = final_sigma;
  solve.slack = final_eval.slack;
  solve.feasible = final_eval.slack <= 1e-6;
  solve.seconds = seconds_since(start);
  return solve;
}

ControlStudyResult run_control_study(const ControlStudyConfig& cfg) {
  const std::vector<ControlMethod> methods = {ControlMethod::DeterministicFull,
                                              ControlMethod::DeterministicSubset,
                                              ControlMethod::Probabilistic};
  const int combos =
      static_cast<int>(cfg.n_schedule.size()) * cfg.repetitions * static_cast<int>(methods.size());
  ControlStudyResult out;
  out.reports.resize(static_cast<size_t>(combos));

  const Matrix states = grid_inputs(cfg.state_lo, cfg.state_hi, cfg.state_grid);
  const Box domain = interval(cfg.state_lo, cfg.state_hi);

  ProbBoundParams prob_params;
  prob_params.sub_gaussian_R = cfg.epsilon;
  prob_params.confidence_p = cfg.confidence_p;
  prob_params.sigma = cfg.epsilon;

  // One work item per (n, rep, method); states run sequentially inside so the
  // per-state timing stays comparable.
  parallel_for(combos, resolve_threads(cfg.threads), [&](int item) {
    const int per_n = cfg.repetitions * static_cast<int>(methods.size());
    const int n_idx = item / per_n;
    const int rep = (item % per_n) / static_cast<int>(methods.size());
    const int method_idx = item % static_cast<int>(methods.size());
    const int n = cfg.n_schedule[static_cast<size_t>(n_idx)];
    const ControlMethod method = methods[static_cast<size_t>(method_idx)];

    ControlTrialReport report;
    report.method = method;
    report.n = n;
    report.rep = rep;
    try {
      // The data set is shared by the three methods of the same (n, rep).
      const uint64_t data_seed =
          derive_seed(cfg.master_seed, static_cast<uint64_t>(n_idx * cfg.repetitions + rep));
      const Matrix inputs = sample_distinct_inputs(domain, n, derive_seed(data_seed, 0));
      NoiseModel noise;
      noise.epsilon = cfg.epsilon;
      noise.seed = derive_seed(data_seed, 1);
      const Vector w = sample_noise(noise, n);
      Vector y(n);
      for (int i = 0; i < n; ++i) {
        y[i] = cfg.problem.residual(inputs(i, 0)) + w[i];
      }
      const ProblemData data = make_problem_data(
          inputs, y, KernelSpec::squared_exponential(cfg.problem.lengthscale),
          KernelSpec::dirac(), cfg.gamma_f_sq,
          static_cast<double>(n) * cfg.epsilon * cfg.epsilon);

      std::vector<double> times;
      times.reserve(static_cast<size_t>(states.rows()));
      int feasible = 0;
      bool safety_ok = true;
      for (Eigen::Index s = 0; s < states.rows(); ++s) {
        const double x = states(s, 0);
        const ControlSolve solve = solve_safe_control(cfg.problem, data, x, method,
                                                      cfg.optimizer, prob_params,
                                                      cfg.subset_size);
        times.push_back(solve.seconds);
        if (solve.feasible) {
          ++feasible;
          const double x_next =
              cfg.problem.known(x, solve.u) + cfg.problem.residual(x);
          if (x_next < (1.0 - cfg.problem.gamma) * x - 1e-9) safety_ok = false;
        }
      }
      report.feasible_count = feasible;
      report.success_rate = static_cast<double>(feasible) / static_cast<double>(states.rows());
      report.time_median = percentile(times, 0.5);
      report.time_p5 = percentile(times, 0.05);
      report.time_p95 = percentile(times, 0.95);
      report.safety_ok = safety_ok;
    } catch (const std::exception& err) {
      report.ok = false;
      report.error = err.what();
    }
    out.reports[static_cast<size_t>(item)] = std::move(report);
  });

  for (const auto& report : out.reports) {
    if (!report.ok) ++out.failures;
  }
  out.degraded = out.failures > cfg.failure_budget * combos;
  return out;
}

}  // namespace rkhsbound
