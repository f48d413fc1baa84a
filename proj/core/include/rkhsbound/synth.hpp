#pragma once

#include <cstdint>

#include "rkhsbound/gp.hpp"

namespace rkhsbound {

// Deterministic per-item seeding: every stochastic operation takes an
// explicit seed, and experiment seeds derive from (master, index).
uint64_t derive_seed(uint64_t master, uint64_t index);

struct Box {
  Vector lo;
  Vector hi;
};

Box interval(double lo, double hi);

// RKHS element sum_i alpha_i k(., c_i) with exactly the requested squared
// norm alpha^T K alpha.
struct RkhsSample {
  Matrix centers;       // M x d
  Vector coefficients;  // length M
  KernelSpec kernel;
  double norm_sq = 0.0;

  double eval(const PointRef& x) const;
  Vector eval_rows(const Matrix& points) const;
};

RkhsSample sample_rkhs_function(const KernelSpec& kernel, const Box& domain, int centers,
                                double target_norm_sq, uint64_t seed);

enum class NoiseKind { TruncatedGaussian, None };

struct NoiseModel {
  NoiseKind kind = NoiseKind::TruncatedGaussian;
  double epsilon = 0.01;  // std of the base normal and the absolute cap
  uint64_t seed = 0;
};

// Rejection-sampled truncated Gaussian; every entry satisfies |w| <= epsilon.
Vector sample_noise(const NoiseModel& model, Eigen::Index count);

// y_i = f(x_i) + w_i with budgets gamma_f_sq = f.norm_sq and
// gamma_w_sq = N epsilon^2 (floored at 1e-12 so noise-free data stay valid).
ProblemData make_dataset(const RkhsSample& f, const NoiseModel& noise, const Matrix& inputs);

// Uniform draws in the box, resampled until pairwise distinct under the
// point-equality tolerance.
Matrix sample_distinct_inputs(const Box& domain, int count, uint64_t seed);

// Uniform 1-D grid including both endpoints, as an inputs matrix.
Matrix grid_inputs(double lo, double hi, int count);

}  // namespace rkhsbound
