#include <doctest.h>

#include <cmath>
#include <random>

#include "rkhsbound/gp.hpp"
#include "test_support.hpp"

using namespace rkhsbound;
using rkhsbound::testing::column_inputs;
using rkhsbound::testing::one_point_problem;
using rkhsbound::testing::random_feasible_problem;
using rkhsbound::testing::scalar_point;
using rkhsbound::testing::vec;

namespace {

ProblemData empty_problem(double gamma_f_sq = 1.0, double gamma_w_sq = 1.0) {
  return make_problem_data(Matrix(0, 1), Vector(0), KernelSpec::squared_exponential(1.0),
                           KernelSpec::dirac(), gamma_f_sq, gamma_w_sq);
}

}  // namespace

TEST_CASE("problem data validation") {
  CHECK_THROWS_AS(make_problem_data(column_inputs({0.0, 0.0}), vec({1.0, 2.0}),
                                    KernelSpec::squared_exponential(1.0), KernelSpec::dirac(),
                                    1.0, 1.0),
                  BoundError);
  CHECK_THROWS_AS(make_problem_data(column_inputs({0.0}), vec({1.0}),
                                    KernelSpec::squared_exponential(1.0), KernelSpec::dirac(),
                                    0.0, 1.0),
                  BoundError);
  CHECK_THROWS_AS(make_problem_data(column_inputs({0.0, 1.0}), vec({1.0}),
                                    KernelSpec::squared_exponential(1.0), KernelSpec::dirac(),
                                    1.0, 1.0),
                  BoundError);
}

TEST_CASE("posterior mean trivial cases") {
  const auto no_data = empty_problem();
  CHECK(posterior_mean(no_data, 1.0, scalar_point(0.3)) == 0.0);

  auto data = one_point_problem();
  data.outputs[0] = 0.0;
  CHECK(posterior_mean(data, 0.7, scalar_point(1.1)) == 0.0);
}

TEST_CASE("one-point posterior matches the scalar formulas") {
  const auto data = one_point_problem();
  // k(0,0) / (k(0,0) + sigma^2) * y at sigma = 1
  CHECK(posterior_mean(data, 1.0, scalar_point(0.0)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(posterior_var(data, 1.0, scalar_point(0.0)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(interpolant_norm_sq(data, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("posterior variance approaches the prior for large sigma") {
  const auto data = random_feasible_problem(6, 41);
  const Point q = scalar_point(2.2);
  const double prior = data.kf(q, q);
  CHECK(std::abs(posterior_var(data, 1e8, q) - prior) <= 1e-6);
}

TEST_CASE("beta_sq values") {
  const auto no_data = empty_problem(1.0, 1.0);
  CHECK(beta_sq(no_data, 1.0) == doctest::Approx(2.0));

  // paper experiment budgets with one consistent sample
  const auto data = make_problem_data(column_inputs({1.0}), vec({0.3}),
                                      KernelSpec::squared_exponential(1.0),
                                      KernelSpec::dirac(), 1.0, 1e-4);
  CHECK(beta_sq(data, 0.01) > 0.0);

  // budgets badly violated
  const auto bad = make_problem_data(column_inputs({1.0}), vec({100.0}),
                                     KernelSpec::squared_exponential(1.0),
                                     KernelSpec::dirac(), 1.0, 1.0);
  CHECK(beta_sq(bad, 0.1) < 0.0);
}

TEST_CASE("posterior quantities are continuous in sigma") {
  const auto data = random_feasible_problem(5, 43);
  const Point q = scalar_point(1.3);
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> log_sigma(-3.0, 3.0);
  for (int i = 0; i < 20; ++i) {
    const double sigma = std::pow(10.0, log_sigma(rng));
    const double h = 1e-7 * sigma;
    const double m0 = posterior_mean(data, sigma, q);
    const double m1 = posterior_mean(data, sigma + h, q);
    CHECK(std::abs(m1 - m0) <= 1e-4 * (1.0 + std::abs(m0)));
    const double v0 = posterior_var(data, sigma, q);
    const double v1 = posterior_var(data, sigma + h, q);
    CHECK(std::abs(v1 - v0) <= 1e-4 * (1.0 + std::abs(v0)));
  }
}

TEST_CASE("posterior variance is monotone in sigma") {
  const auto data = random_feasible_problem(6, 53);
  const Point q = scalar_point(0.9);
  double previous = 0.0;
  bool first = true;
  for (double sigma : {1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0}) {
    const double v = posterior_var(data, sigma, q);
    if (!first) CHECK(v >= previous - 1e-12);
    previous = v;
    first = false;
  }
}

TEST_CASE("interpolant norm is decreasing in sigma") {
  const auto data = random_feasible_problem(6, 59);
  CHECK(interpolant_norm_sq(data, 2.0) <= interpolant_norm_sq(data, 1.0) + 1e-12);
  CHECK(interpolant_norm_sq(data, 1.0) <= interpolant_norm_sq(data, 0.5) + 1e-12);
}

TEST_CASE("small sigma interpolates the data at a training point") {
  const auto data = random_feasible_problem(5, 61);
  const Point q = data.inputs.row(2).transpose();
  CHECK(std::abs(posterior_mean(data, 1e-6, q) - data.outputs[2]) <= 1e-3);
  CHECK(posterior_var(data, 1e-6, q) <= 1e-3);
}

TEST_CASE("sigma sweep agrees with the Cholesky path") {
  for (uint64_t seed : {71u, 73u, 79u}) {
    const auto data = random_feasible_problem(7, seed);
    const SigmaSweep sweep(data);
    const Point q = scalar_point(1.7);
    const auto qc = sweep.make_query_cache(q);
    for (double sigma : {1e-4, 1e-2, 0.5, 3.0, 1e3}) {
      const PosteriorState direct = posterior_state(data, sigma, q);
      const PosteriorState fast = sweep.state(qc, sigma);
      CHECK(fast.mean_at_query ==
            doctest::Approx(direct.mean_at_query).epsilon(1e-9));
      CHECK(fast.var_at_query ==
            doctest::Approx(direct.var_at_query).epsilon(1e-9).scale(1.0));
      CHECK(fast.interpolant_norm_sq ==
            doctest::Approx(direct.interpolant_norm_sq).epsilon(1e-9));
    }
  }
}

TEST_CASE("sigma sweep with an SE noise kernel agrees with the Cholesky path") {
  auto data = random_feasible_problem(6, 83);
  data.kw = KernelSpec::squared_exponential(0.8);
  const SigmaSweep sweep(data);
  const Point q = scalar_point(2.9);
  const auto qc = sweep.make_query_cache(q);
  for (double sigma : {1e-2, 1.0, 30.0}) {
    const PosteriorState direct = posterior_state(data, sigma, q);
    const PosteriorState fast = sweep.state(qc, sigma);
    CHECK(fast.mean_at_query == doctest::Approx(direct.mean_at_query).epsilon(1e-8));
    CHECK(fast.var_at_query ==
          doctest::Approx(direct.var_at_query).epsilon(1e-8).scale(1.0));
    CHECK(fast.interpolant_norm_sq ==
          doctest::Approx(direct.interpolant_norm_sq).epsilon(1e-8));
  }
}

TEST_CASE("invalid sigma is rejected") {
  const auto data = one_point_problem();
  CHECK_THROWS_AS(posterior_mean(data, 0.0, scalar_point(0.0)), BoundError);
  CHECK_THROWS_AS(posterior_mean(data, -1.0, scalar_point(0.0)), BoundError);
}
