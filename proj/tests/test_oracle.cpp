#include <doctest.h>

#include <cmath>

#include "rkhsbound/oracle.hpp"
#include "test_support.hpp"

using namespace rkhsbound;
using rkhsbound::testing::column_inputs;
using rkhsbound::testing::random_feasible_problem;
using rkhsbound::testing::scalar_point;
using rkhsbound::testing::vec;

namespace {

QcqpInstance hand_instance(double gamma_f_sq, double gamma_w_sq) {
  QcqpInstance inst;
  inst.phi_train = Matrix::Ones(1, 1);
  inst.phi_test = Vector::Ones(1);
  inst.kw = Matrix::Identity(1, 1);
  inst.y = Vector::Zero(1);
  inst.gamma_f_sq = gamma_f_sq;
  inst.gamma_w_sq = gamma_w_sq;
  return inst;
}

}  // namespace

TEST_CASE("hand-solved scalar instances") {
  // sup theta s.t. theta^2 <= 1, theta^2 <= 1  -> 1 (function constraint binds)
  const auto both = oracle_upper(hand_instance(1.0, 1.0));
  CHECK(both.value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(both.gap <= 1e-6 * 2.0);

  // sup theta s.t. theta^2 <= 1, theta^2 <= 0.25 -> 0.5 (noise constraint binds)
  const auto noise = oracle_upper(hand_instance(1.0, 0.25));
  CHECK(noise.value == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("lower oracle mirrors the negated upper") {
  const auto inst = hand_instance(1.0, 0.25);
  const auto low = oracle_lower(inst);
  CHECK(low.value == doctest::Approx(-0.5).epsilon(1e-6));

  const auto data = random_feasible_problem(5, 301);
  const auto qinst = make_qcqp_instance(data, scalar_point(1.9));
  QcqpInstance negated = qinst;
  negated.phi_test = -qinst.phi_test;
  const auto a = oracle_lower(qinst);
  const auto b = oracle_upper(negated);
  CHECK(a.value == doctest::Approx(-b.value).epsilon(1e-9));
}

TEST_CASE("oracle multipliers identify the active set") {
  // far query, tiny noise budget relative to y: both constraints active
  const auto data = random_feasible_problem(5, 307, 1.0, 0.05);
  const Point q = scalar_point(1.2);
  const auto inst = make_qcqp_instance(data, q);
  const auto up = oracle_upper(inst);
  const auto bound = optimal_bound(data, q);
  if (bound.case_upper == CaseLabel::Case3_Interior) {
    const double implied = std::sqrt(up.lambda_f / up.lambda_w);
    CHECK(std::abs(implied - bound.sigma_star_upper) <=
          1e-3 * (1.0 + bound.sigma_star_upper));
  }
}

TEST_CASE("oracle agrees with the bound layer on random instances") {
  OracleCheckConfig cfg;
  cfg.instances = 40;
  cfg.seed = 20240311;
  const auto result = run_oracle_check(cfg);
  CHECK(result.failures == 0);
  CHECK(result.max_rel_diff <= 1e-6);
  CHECK(result.max_gap <= 1e-6);
}

TEST_CASE("oracle reports infeasible instances as inconclusive") {
  QcqpInstance inst = hand_instance(1.0, 1.0);
  inst.y = Vector::Constant(1, 100.0);  // misfit cannot reach the budget
  CHECK_THROWS_AS(oracle_upper(inst), BoundError);
}
