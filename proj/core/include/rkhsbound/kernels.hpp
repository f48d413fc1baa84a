#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <vector>

#include "rkhsbound/errors.hpp"

namespace rkhsbound {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Point = Eigen::VectorXd;
using PointRef = Eigen::Ref<const Eigen::VectorXd>;

// Two points count as equal (Dirac kernel, distinct-inputs check, matching a
// query against the training set) iff their max-norm distance is below this.
inline constexpr double kPointEqualityTol = 1e-12;

bool points_equal(const PointRef& a, const PointRef& b);

enum class KernelKind { SquaredExponential, Dirac, LinearFeatures, Scaled };

using FeatureFn = std::function<double(const PointRef&)>;

// A positive-(semi)definite kernel: squared exponential, Dirac, a finite
// feature expansion phi(x).phi(x'), or an output-scaled wrapper around any of
// these. Value type; cheap to copy.
class KernelSpec {
 public:
  static KernelSpec squared_exponential(double lengthscale);
  static KernelSpec dirac();
  static KernelSpec linear_features(std::vector<FeatureFn> features);
  // Monomials 1, x, ..., x^degree on scalar inputs.
  static KernelSpec polynomial(int degree);
  static KernelSpec scaled(KernelSpec base, double output_scale);

  KernelKind kind() const noexcept { return kind_; }
  double lengthscale() const;
  double output_scale() const;
  const KernelSpec& base() const;
  int feature_count() const;
  // Feature vector phi(x); only valid for LinearFeatures (and Scaled wrappers
  // around it, where the scale multiplies the squared features).
  Vector features_at(const PointRef& x) const;

  double operator()(const PointRef& x, const PointRef& x2) const;

 private:
  KernelSpec() = default;

  KernelKind kind_ = KernelKind::Dirac;
  double lengthscale_ = 1.0;
  double output_scale_ = 1.0;
  std::shared_ptr<const std::vector<FeatureFn>> features_;
  std::shared_ptr<const KernelSpec> base_;
};

double kernel_eval(const KernelSpec& spec, const PointRef& x, const PointRef& x2);

// Points are matrix rows. Entry (i, j) is k(rows[i], cols[j]).
Matrix gram_matrix(const KernelSpec& spec, const Matrix& rows, const Matrix& cols);
// Symmetric case rows == cols.
Matrix gram_matrix(const KernelSpec& spec, const Matrix& points);
// Cross-covariances k(points[i], query).
Vector gram_column(const KernelSpec& spec, const Matrix& points, const PointRef& query);

}  // namespace rkhsbound
