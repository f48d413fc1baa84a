// Acceptance suite: each criterion prints one [PASS]/[FAIL] line; the binary
// exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <vector>

#include "rkhsbound/baselines.hpp"
#include "rkhsbound/experiments.hpp"
#include "rkhsbound/oracle.hpp"
#include "rkhsbound/synth.hpp"

using namespace rkhsbound;

namespace {

using Clock = std::chrono::steady_clock;

int g_failures = 0;

void report(int criterion, bool pass, const std::string& summary, double seconds) {
  std::printf("[%s] criterion %d: %s (%.1f s)\n", pass ? "PASS" : "FAIL", criterion,
              summary.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

Point scalar_point(double x) {
  Point p(1);
  p[0] = x;
  return p;
}

// --------------------------------------------------------------------------
// 1. Theorem-1 oracle equivalence on 200 randomized instances.
void criterion_1() {
  const auto start = Clock::now();
  OracleCheckConfig cfg;
  cfg.instances = 200;
  cfg.seed = 90210;
  const auto result = run_oracle_check(cfg);
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  const bool pass = result.failures == 0 && result.max_rel_diff <= 1e-6 &&
                    result.max_gap <= 1e-6 && seconds <= 60.0;
  std::ostringstream msg;
  msg << "oracle equivalence on 200 instances: max rel diff " << result.max_rel_diff
      << ", max gap " << result.max_gap << ", failures " << result.failures;
  report(1, pass, msg.str(), seconds);
}

// --------------------------------------------------------------------------
// 2. Deterministic containment: 500 synthetic trials, zero tolerance.
void criterion_2() {
  const auto start = Clock::now();
  const std::vector<int> n_schedule = {1, 5, 20, 100};
  const int trials_per_n = 125;
  const KernelSpec kf = KernelSpec::squared_exponential(1.0);
  const Box domain = interval(0.0, 4.0);
  const Matrix grid = grid_inputs(0.0, 4.0, 200);

  int violations = 0, failures = 0, total = 0;
  for (size_t ni = 0; ni < n_schedule.size(); ++ni) {
    for (int trial = 0; trial < trials_per_n; ++trial) {
      ++total;
      const uint64_t seed = derive_seed(0xACCE97, static_cast<uint64_t>(ni * 1000 + trial));
      try {
        const RkhsSample f = sample_rkhs_function(kf, domain, 50, 1.0, derive_seed(seed, 0));
        const Matrix inputs =
            sample_distinct_inputs(domain, n_schedule[ni], derive_seed(seed, 1));
        NoiseModel noise;
        noise.epsilon = 0.01;
        noise.seed = derive_seed(seed, 2);
        const ProblemData data = make_dataset(f, noise, inputs);
        const BoundSolver solver(data);
        bool contained = true;
        for (Eigen::Index i = 0; i < grid.rows() && contained; ++i) {
          const auto result = solver.at(grid.row(i).transpose());
          const double truth = f.eval(grid.row(i).transpose());
          contained = truth >= result.lower && truth <= result.upper;
        }
        if (!contained) ++violations;
      } catch (const std::exception&) {
        ++failures;
      }
    }
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  const bool pass = violations == 0 && failures == 0 && seconds <= 300.0;
  std::ostringstream msg;
  msg << "deterministic containment in " << total << " trials: " << violations
      << " violations, " << failures << " errors";
  report(2, pass, msg.str(), seconds);
}

// --------------------------------------------------------------------------
// 3. Case-limit consistency.
void criterion_3() {
  const auto start = Clock::now();
  std::mt19937_64 rng(555);
  std::uniform_real_distribution<double> unif(0.0, 4.0);
  std::normal_distribution<double> gauss(0.0, 0.3);

  int case1_checked = 0;
  double case1_worst = 0.0;
  for (int rep = 0; rep < 40; ++rep) {
    const int n = 2 + static_cast<int>(rng() % 5);
    Matrix inputs(n, 1);
    for (int i = 0; i < n; ++i) inputs(i, 0) = unif(rng) + 8.0 * (i % 2);
    bool distinct = true;
    for (int i = 0; i < n && distinct; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (std::abs(inputs(i, 0) - inputs(j, 0)) < 1e-6) distinct = false;
      }
    }
    if (!distinct) continue;
    Vector y(n);
    for (int i = 0; i < n; ++i) y[i] = gauss(rng);
    const auto data = make_problem_data(inputs, y, KernelSpec::squared_exponential(1.0),
                                        KernelSpec::dirac(), 1.0, 10.0);
    const Point q = scalar_point(unif(rng));
    for (Side side : {Side::Upper, Side::Lower}) {
      if (!case1_feasible(data, q, side)) continue;
      ++case1_checked;
      const double closed = case1_bound(data, q, side);
      const double relaxed =
          side == Side::Upper ? relaxed_upper(data, 1e8, q) : relaxed_lower(data, 1e8, q);
      case1_worst =
          std::max(case1_worst, std::abs(relaxed - closed) / (1.0 + std::abs(closed)));
    }
  }

  int corollary_checked = 0;
  double corollary_worst = 0.0;
  for (int rep = 0; rep < 40; ++rep) {
    const int n = 2 + static_cast<int>(rng() % 4);
    Matrix inputs(n, 1);
    for (int i = 0; i < n; ++i) inputs(i, 0) = 1.5 * i + 0.3 * unif(rng) / 4.0;
    Vector y(n);
    for (int i = 0; i < n; ++i) y[i] = gauss(rng);
    const double gamma_w = 0.2;
    const auto data = make_problem_data(inputs, y, KernelSpec::squared_exponential(1.0),
                                        KernelSpec::dirac(), 100.0, gamma_w * gamma_w);
    const Eigen::Index k = static_cast<Eigen::Index>(rng() % n);
    if (!corollary_feasible(data, k, Side::Upper) ||
        !corollary_feasible(data, k, Side::Lower)) {
      continue;
    }
    ++corollary_checked;
    const auto result = optimal_bound(data, inputs.row(k).transpose());
    corollary_worst = std::max(corollary_worst, std::abs(result.upper - (y[k] + gamma_w)));
    corollary_worst = std::max(corollary_worst, std::abs(result.lower - (y[k] - gamma_w)));
  }

  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  const bool pass = case1_checked >= 20 && case1_worst <= 1e-5 && corollary_checked >= 20 &&
                    corollary_worst <= 1e-8;
  std::ostringstream msg;
  msg << "case limits: " << case1_checked << " case-1 checks (worst rel " << case1_worst
      << "), " << corollary_checked << " corollary checks (worst abs " << corollary_worst
      << ")";
  report(3, pass, msg.str(), seconds);
}

// --------------------------------------------------------------------------
// 4. Recovery tests: power-function envelope and the Fogel ellipsoid.
void criterion_4() {
  const auto start = Clock::now();
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> unif(0.0, 4.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // (a) tiny noise budget reproduces the interpolation envelope
  int power_ok = 0;
  const KernelSpec kf = KernelSpec::squared_exponential(1.0);
  const Box domain = interval(0.0, 4.0);
  for (int rep = 0; rep < 20; ++rep) {
    const uint64_t seed = derive_seed(0xF0F0, static_cast<uint64_t>(rep));
    const RkhsSample f = sample_rkhs_function(kf, domain, 20, 1.0, seed);
    Matrix inputs(5, 1);
    for (int i = 0; i < 5; ++i) inputs(i, 0) = 0.3 + 0.85 * i + 0.1 * unif(rng) / 4.0;
    NoiseModel none;
    none.kind = NoiseKind::None;
    const ProblemData data = make_dataset(f, none, inputs);  // gamma_w_sq = 1e-12
    const BoundSolver solver(data);
    bool ok = true;
    for (double xq : {0.7, 1.9, 3.4}) {
      const auto [lo, hi] = golomb_bound(data, scalar_point(xq));
      const auto result = solver.at(scalar_point(xq));
      ok = ok && std::abs(result.upper - hi) <= 1e-3 * (1.0 + std::abs(hi));
      ok = ok && std::abs(result.lower - lo) <= 1e-3 * (1.0 + std::abs(lo));
    }
    if (ok) ++power_ok;
  }

  // (b) linear-kernel case-2 bound equals the Fogel support value
  int fogel_ok = 0;
  bool sampling_ok = true;
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 3 + static_cast<int>(rng() % 4);
    const KernelSpec lin = KernelSpec::polynomial(1);  // features 1, x
    Matrix inputs(n, 1);
    for (int i = 0; i < n; ++i) inputs(i, 0) = unif(rng) + 4.5 * (i % 2 == 0);
    bool distinct = true;
    for (int i = 0; i < n && distinct; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (std::abs(inputs(i, 0) - inputs(j, 0)) < 1e-6) distinct = false;
      }
    }
    if (!distinct) continue;
    Vector theta_true(2);
    theta_true << 0.4 * gauss(rng), 0.4 * gauss(rng);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
      y[i] = theta_true[0] + theta_true[1] * inputs(i, 0) + 0.05 * gauss(rng);
    }
    const auto data = make_problem_data(inputs, y, lin, KernelSpec::dirac(), 1e8,
                                        1.0 + y.squaredNorm());
    const Point q = scalar_point(unif(rng));
    const Eigen::Index nn = data.size();
    Matrix kf_full(nn + 1, nn + 1);
    kf_full.topLeftCorner(nn, nn) = gram_matrix(data.kf, data.inputs);
    const Vector k_star = gram_column(data.kf, data.inputs, q);
    kf_full.topRightCorner(nn, 1) = k_star;
    kf_full.bottomLeftCorner(1, nn) = k_star.transpose();
    kf_full(nn, nn) = data.kf(q, q);
    const auto decomp = feature_decompose(kf_full);
    if (!case2_feasible(data, q, decomp, Side::Upper)) continue;

    const auto ell = fogel_ellipsoid(data, decomp);
    const double support = ell.support_value(decomp.phi_test.transpose());
    const double closed = case2_bound(data, q, decomp, Side::Upper);
    if (std::abs(support - closed) <= 1e-8 * (1.0 + std::abs(closed))) ++fogel_ok;

    // rejection sampling: no member of the ellipsoid may exceed the bound
    int kept = 0;
    for (int i = 0; kept < 10000 && i < 2000000; ++i) {
      Vector theta = ell.center;
      for (Eigen::Index j = 0; j < theta.size(); ++j) {
        theta[j] += 2.0 * std::sqrt(std::max(ell.radius_sq, 1e-6)) * gauss(rng);
      }
      if (!ell.contains(theta)) continue;
      ++kept;
      if (decomp.phi_test.dot(theta) > closed + 1e-7 * (1.0 + std::abs(closed))) {
        sampling_ok = false;
      }
    }
    if (kept < 1000) sampling_ok = false;
  }

  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  const bool pass = power_ok == 20 && fogel_ok >= 15 && sampling_ok;
  std::ostringstream msg;
  msg << "recovery: power-function match " << power_ok << "/20, fogel support match "
      << fogel_ok << " instances, sampling " << (sampling_ok ? "clean" : "violated");
  report(4, pass, msg.str(), seconds);
}

// --------------------------------------------------------------------------
// 5. Area-comparison trends at desk scale.
void criterion_5() {
  const auto start = Clock::now();
  AreaComparisonConfig cfg;
  cfg.trials = 100;
  cfg.master_seed = 20240601;
  const auto result = run_area_comparison(cfg);

  bool dominance_all = true;
  std::map<int, std::vector<double>> optimal, prob;
  for (const auto& r : result.reports) {
    if (!r.ok) continue;
    dominance_all = dominance_all && r.area_optimal <= r.area_relaxed_eps * (1.0 + 1e-9);
    optimal[r.n].push_back(r.area_optimal);
    prob[r.n].push_back(r.area_prob);
  }
  bool low_data_win = true;
  for (int n : {1, 2, 5, 10}) {
    low_data_win = low_data_win && median_of(optimal[n]) < median_of(prob[n]);
  }
  bool prob_decreasing = true;
  double previous = 0.0;
  bool first = true;
  for (int n : {50, 100, 200}) {
    const double med = median_of(prob[n]);
    if (!first) prob_decreasing = prob_decreasing && med < previous;
    previous = med;
    first = false;
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  const bool pass = result.failures == 0 && !result.degraded && dominance_all &&
                    low_data_win && prob_decreasing && seconds <= 900.0;
  std::ostringstream msg;
  msg << "area trends: optimal<=relaxed " << (dominance_all ? "always" : "violated")
      << ", low-data optimal beats probabilistic " << (low_data_win ? "yes" : "no")
      << ", probabilistic median decreasing for N>=50 " << (prob_decreasing ? "yes" : "no")
      << ", failures " << result.failures;
  report(5, pass, msg.str(), seconds);
}

// --------------------------------------------------------------------------
// 6. Safe-control trends.
void criterion_6() {
  const auto start = Clock::now();
  ControlStudyConfig cfg;
  cfg.master_seed = 20240602;
  const auto result = run_control_study(cfg);

  std::map<std::pair<int, int>, std::vector<double>> rates;  // (method, n)
  std::map<std::pair<int, int>, std::vector<double>> medians;
  bool safety = true;
  for (const auto& r : result.reports) {
    if (!r.ok) continue;
    const int m = static_cast<int>(r.method);
    rates[{m, r.n}].push_back(r.success_rate);
    medians[{m, r.n}].push_back(r.time_median);
    safety = safety && r.safety_ok;
  }
  const auto mean_of = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  };

  bool ordering = true;
  for (int n : cfg.n_schedule) {
    const double full = mean_of(rates[{0, n}]);
    const double subset = mean_of(rates[{1, n}]);
    const double prob = mean_of(rates[{2, n}]);
    ordering = ordering && full >= subset - 1e-12 && full >= prob - 1e-12;
  }

  std::vector<double> subset_medians, full_medians_10, full_medians_300;
  std::map<int, double> subset_by_n;
  for (int n : cfg.n_schedule) subset_by_n[n] = median_of(medians[{1, n}]);
  double subset_min = 1e300, subset_max = 0.0;
  for (const auto& [n, med] : subset_by_n) {
    subset_min = std::min(subset_min, med);
    subset_max = std::max(subset_max, med);
  }
  const bool subset_flat = subset_max <= 2.0 * subset_min;
  const double full_10 = median_of(medians[{0, 10}]);
  const double full_300 = median_of(medians[{0, 300}]);
  const bool full_grows = full_300 >= 5.0 * full_10;

  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  const bool pass = result.failures == 0 && ordering && subset_flat && full_grows &&
                    safety && seconds <= 1200.0;
  std::ostringstream msg;
  msg << "control trends: ordering " << (ordering ? "holds" : "violated")
      << ", subset time ratio " << (subset_min > 0 ? subset_max / subset_min : 0.0)
      << ", full 300/10 time ratio " << (full_10 > 0 ? full_300 / full_10 : 0.0)
      << ", safety " << (safety ? "100%" : "violated");
  report(6, pass, msg.str(), seconds);
}

// --------------------------------------------------------------------------
// 7. Numerical hygiene on 100 random instances.
void criterion_7() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> unif(0.0, 4.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const KernelSpec kf = KernelSpec::squared_exponential(1.0);
  const Box domain = interval(0.0, 4.0);

  int dominance_bad = 0, symmetry_bad = 0, monotonicity_bad = 0, derivative_bad = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const uint64_t seed = derive_seed(0x4d9, static_cast<uint64_t>(rep));
    const int n = 4 + static_cast<int>(rng() % 5);
    const RkhsSample f = sample_rkhs_function(kf, domain, 20, 1.0, derive_seed(seed, 0));
    const Matrix inputs = sample_distinct_inputs(domain, n + 1, derive_seed(seed, 1));
    NoiseModel noise;
    noise.epsilon = 0.01;
    noise.seed = derive_seed(seed, 2);
    const ProblemData extended = make_dataset(f, noise, inputs);
    const ProblemData data =
        make_problem_data(extended.inputs.topRows(n), extended.outputs.head(n), extended.kf,
                          extended.kw, extended.gamma_f_sq, extended.gamma_w_sq);
    const BoundSolver solver(data);
    const BoundSolver extended_solver(extended);
    const Point q = scalar_point(unif(rng));
    const auto result = solver.at(q);

    // relaxation dominance across the seventeen-point grid + symmetry
    for (int g = 0; g <= 16; ++g) {
      const double sigma = std::pow(10.0, -4.0 + 0.5 * g);
      if (beta_sq(data, sigma) < 0.0) continue;
      const auto [lo, hi] = solver.relaxed_at(q, sigma);
      if (result.upper > hi + 1e-8 * (1.0 + std::abs(hi))) ++dominance_bad;
      if (result.lower < lo - 1e-8 * (1.0 + std::abs(lo))) ++dominance_bad;
      const double mean = posterior_mean(data, sigma, q);
      if (std::abs((hi - mean) - (mean - lo)) > 1e-10 * (1.0 + hi - lo)) ++symmetry_bad;
    }

    // data monotonicity at fixed budgets
    const auto extended_result = extended_solver.at(q);
    if (extended_result.upper > result.upper + 1e-8 * (1.0 + std::abs(result.upper))) {
      ++monotonicity_bad;
    }
    if (extended_result.lower < result.lower - 1e-8 * (1.0 + std::abs(result.lower))) {
      ++monotonicity_bad;
    }

    // vanishing sigma-derivative at interior optimizers
    if (result.case_upper == CaseLabel::Case3_Interior) {
      const double t = std::log10(result.sigma_star_upper);
      const double h = 1e-3;
      const double up = solver.relaxed_at(q, std::pow(10.0, t + h)).second;
      const double down = solver.relaxed_at(q, std::pow(10.0, t - h)).second;
      const double derivative = (up - down) / (2.0 * h);
      if (std::abs(derivative) > 1e-4 * (1.0 + std::abs(result.upper))) ++derivative_bad;
    }
  }

  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  const bool pass =
      dominance_bad == 0 && symmetry_bad == 0 && monotonicity_bad == 0 && derivative_bad == 0;
  std::ostringstream msg;
  msg << "hygiene on 100 instances: dominance " << dominance_bad << ", symmetry "
      << symmetry_bad << ", monotonicity " << monotonicity_bad << ", sigma-derivative "
      << derivative_bad << " violations";
  report(7, pass, msg.str(), seconds);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d acceptance criteria failed\n", g_failures);
  return 1;
}
