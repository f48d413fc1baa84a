#pragma once

#include "rkhsbound/bounds.hpp"

namespace rkhsbound {

struct ProbBoundParams {
  double sub_gaussian_R = 0.01;
  double confidence_p = 0.99;
  double sigma = 0.01;  // fixed regularization; the experiments use sigma = epsilon
};

// Self-normalized-martingale constant for the high-probability baseline:
// Gamma_f + (R / sigma) sqrt(2 ln(1/(1-p)) + ln det(I + sigma^-2 Kf)).
double prob_beta(const ProblemData& data, const ProbBoundParams& params);

// mean +/- prob_beta * sqrt(var) at the fixed sigma; {lower, upper}.
std::pair<double, double> prob_bound(const ProblemData& data, const ProbBoundParams& params,
                                     const PointRef& query);

// Noise-free interpolation envelope: minimum-norm interpolant plus/minus
// sqrt(Gamma_f^2 - ||mu0||^2) times the power function. Solves with Kf
// directly at sigma = 0 (single jitter fallback).
std::pair<double, double> golomb_bound(const ProblemData& data, const PointRef& query);

// Non-falsified parameter set for finite feature expansions under Dirac
// noise: ||theta - center||^2_{P^{-1}} <= radius_sq.
struct FogelEllipsoid {
  Vector center;          // theta_mu, least-squares estimate
  Matrix shape;           // P
  double radius_sq = 0.0;

  double support_value(const Vector& direction) const;
  bool contains(const Vector& theta, double slack = 1e-9) const;
};

FogelEllipsoid fogel_ellipsoid(const ProblemData& data, const FeatureDecomposition& decomp);

}  // namespace rkhsbound
