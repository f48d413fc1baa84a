#include <doctest.h>

#include <cmath>
#include <random>

#include "rkhsbound/baselines.hpp"
#include "test_support.hpp"

using namespace rkhsbound;
using rkhsbound::testing::column_inputs;
using rkhsbound::testing::random_feasible_problem;
using rkhsbound::testing::scalar_point;
using rkhsbound::testing::vec;

namespace {

FeatureDecomposition decompose_with_query(const ProblemData& data, const Point& query) {
  const Eigen::Index n = data.size();
  Matrix kf_full(n + 1, n + 1);
  kf_full.topLeftCorner(n, n) = gram_matrix(data.kf, data.inputs);
  const Vector k_star = gram_column(data.kf, data.inputs, query);
  kf_full.topRightCorner(n, 1) = k_star;
  kf_full.bottomLeftCorner(1, n) = k_star.transpose();
  kf_full(n, n) = data.kf(query, query);
  return feature_decompose(kf_full);
}

}  // namespace

TEST_CASE("probabilistic beta with no data") {
  const auto data = make_problem_data(Matrix(0, 1), Vector(0),
                                      KernelSpec::squared_exponential(1.0),
                                      KernelSpec::dirac(), 1.0, 1.0);
  ProbBoundParams params;
  params.sub_gaussian_R = 0.01;
  params.confidence_p = 0.99;
  params.sigma = 0.01;
  const double expected = 1.0 + 1.0 * std::sqrt(2.0 * std::log(100.0));
  CHECK(prob_beta(data, params) == doctest::Approx(expected).epsilon(1e-12));
  const auto [lo, hi] = prob_bound(data, params, scalar_point(0.3));
  CHECK(hi == doctest::Approx(expected).epsilon(1e-12));
  CHECK(lo == doctest::Approx(-expected).epsilon(1e-12));
}

TEST_CASE("probabilistic envelope is symmetric around the posterior mean") {
  const auto data = random_feasible_problem(6, 401);
  ProbBoundParams params;
  const Point q = scalar_point(1.4);
  const auto [lo, hi] = prob_bound(data, params, q);
  const double mean = posterior_mean(data, params.sigma, q);
  CHECK(std::abs((hi - mean) - (mean - lo)) <= 1e-10 * (1.0 + hi - lo));
  CHECK(lo <= mean);
  CHECK(mean <= hi);
}

TEST_CASE("per-query probabilistic width shrinks on nested data") {
  const auto big = random_feasible_problem(10, 403);
  const auto small = make_problem_data(big.inputs.topRows(5), big.outputs.head(5), big.kf,
                                       big.kw, big.gamma_f_sq, big.gamma_w_sq);
  ProbBoundParams params;
  const Point q = scalar_point(2.0);
  const auto [lo_s, hi_s] = prob_bound(small, params, q);
  const auto [lo_b, hi_b] = prob_bound(big, params, q);
  // the width combines a shrinking variance and a growing log-det; variance
  // wins per query on nested data
  CHECK(hi_b - lo_b <= (hi_s - lo_s) * (1.0 + 1e-9) + 1e-12);
}

TEST_CASE("noise-free envelope pinches at the data") {
  const auto data = random_feasible_problem(5, 409, 1.0, 1e-12);
  for (Eigen::Index k = 0; k < data.size(); ++k) {
    const auto [lo, hi] = golomb_bound(data, data.inputs.row(k).transpose());
    CHECK(hi - lo <= 1e-6);
    CHECK(std::abs(0.5 * (hi + lo) - data.outputs[k]) <= 1e-6);
  }
}

TEST_CASE("noise-free envelope with no data") {
  const auto data = make_problem_data(Matrix(0, 1), Vector(0),
                                      KernelSpec::squared_exponential(1.0),
                                      KernelSpec::dirac(), 4.0, 1.0);
  const auto [lo, hi] = golomb_bound(data, scalar_point(0.2));
  CHECK(hi == doctest::Approx(2.0));
  CHECK(lo == doctest::Approx(-2.0));
}

TEST_CASE("noise-free envelope matches the tiny-budget optimal bound") {
  const auto data = random_feasible_problem(5, 419, 1.0, 1e-12);
  for (double xq : {0.6, 2.3}) {
    const Point q = scalar_point(xq);
    const auto [lo, hi] = golomb_bound(data, q);
    const auto opt = optimal_bound(data, q);
    CHECK(std::abs(opt.upper - hi) <= 1e-3 * (1.0 + std::abs(hi)));
    CHECK(std::abs(opt.lower - lo) <= 1e-3 * (1.0 + std::abs(lo)));
  }
}

TEST_CASE("noise-free bound reports falsification when the interpolant is too rough") {
  const auto data = make_problem_data(column_inputs({0.0, 0.5}), vec({5.0, -5.0}),
                                      KernelSpec::squared_exponential(1.0),
                                      KernelSpec::dirac(), 1.0, 1.0);
  CHECK_THROWS_AS(golomb_bound(data, scalar_point(1.0)), BoundError);
}

TEST_CASE("fogel ellipsoid basics") {
  // one feature, one point: phi(x) = 1, y = 2, gamma_w^2 = 1 -> theta in [1, 3]
  const auto ones = KernelSpec::linear_features({[](const PointRef&) { return 1.0; }});
  const auto data = make_problem_data(column_inputs({0.0}), vec({2.0}), ones,
                                      KernelSpec::dirac(), 100.0, 1.0);
  const auto decomp = decompose_with_query(data, scalar_point(1.0));
  const auto ell = fogel_ellipsoid(data, decomp);
  CHECK(ell.center.size() == 1);
  // center and radius are in the decomposition's feature basis (phi = +-1)
  const double support_hi = ell.support_value(decomp.phi_test.transpose());
  const double support_lo = -ell.support_value(-decomp.phi_test.transpose());
  CHECK(support_hi == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(support_lo == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("zero outputs center the ellipsoid at the origin") {
  const auto lin = KernelSpec::linear_features({[](const PointRef& x) { return x[0]; }});
  const auto data = make_problem_data(column_inputs({1.0, 2.0}), vec({0.0, 0.0}), lin,
                                      KernelSpec::dirac(), 100.0, 2.5);
  const auto decomp = decompose_with_query(data, scalar_point(1.5));
  const auto ell = fogel_ellipsoid(data, decomp);
  CHECK(ell.center.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(ell.radius_sq == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("fogel support matches case 2 and dominates sampled members") {
  const auto lin = KernelSpec::linear_features(
      {[](const PointRef& x) { return x[0]; }, [](const PointRef&) { return 1.0; }});
  const auto data = make_problem_data(column_inputs({0.5, 1.5, 3.0}), vec({0.6, 1.1, 2.2}),
                                      lin, KernelSpec::dirac(), 1e6, 0.5);
  const Point q = scalar_point(2.0);
  const auto decomp = decompose_with_query(data, q);
  const auto ell = fogel_ellipsoid(data, decomp);
  REQUIRE(case2_feasible(data, q, decomp, Side::Upper));
  const double support = ell.support_value(decomp.phi_test.transpose());
  CHECK(support ==
        doctest::Approx(case2_bound(data, q, decomp, Side::Upper)).epsilon(1e-9));

  // rejection-sample members of the ellipsoid; none may beat the support value
  std::mt19937_64 rng(421);
  std::normal_distribution<double> gauss(0.0, 1.0);
  int kept = 0;
  for (int i = 0; kept < 2000 && i < 200000; ++i) {
    Vector theta = ell.center;
    Vector step(theta.size());
    for (Eigen::Index j = 0; j < step.size(); ++j) step[j] = gauss(rng);
    theta += step;
    if (!ell.contains(theta)) continue;
    ++kept;
    CHECK(decomp.phi_test.dot(theta) <= support + 1e-9 * (1.0 + std::abs(support)));
  }
  CHECK(kept > 100);
}

TEST_CASE("fogel requires the dirac noise kernel") {
  const auto lin = KernelSpec::linear_features({[](const PointRef& x) { return x[0]; }});
  const auto data = make_problem_data(column_inputs({1.0, 2.0}), vec({1.0, 2.0}), lin,
                                      KernelSpec::squared_exponential(1.0), 1.0, 1.0);
  const auto decomp = decompose_with_query(data, scalar_point(1.5));
  CHECK_THROWS_AS(fogel_ellipsoid(data, decomp), BoundError);
}
