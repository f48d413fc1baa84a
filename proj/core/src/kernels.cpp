#include "rkhsbound/kernels.hpp"

#include <cmath>
#include <utility>

namespace rkhsbound {

bool points_equal(const PointRef& a, const PointRef& b) {
  if (a.size() != b.size()) return false;
  if (a.size() == 0) return true;
  return (a - b).cwiseAbs().maxCoeff() <= kPointEqualityTol;
}

KernelSpec KernelSpec::squared_exponential(double lengthscale) {
  if (!(lengthscale > 0.0)) {
    throw BoundError(ErrorKind::InvalidInput, "squared-exponential lengthscale must be > 0",
                     lengthscale);
  }
  KernelSpec spec;
  spec.kind_ = KernelKind::SquaredExponential;
  spec.lengthscale_ = lengthscale;
  return spec;
}

KernelSpec KernelSpec::dirac() {
  KernelSpec spec;
  spec.kind_ = KernelKind::Dirac;
  return spec;
}

KernelSpec KernelSpec::linear_features(std::vector<FeatureFn> features) {
  if (features.empty()) {
    throw BoundError(ErrorKind::InvalidInput, "linear-features kernel needs at least one feature");
  }
  KernelSpec spec;
  spec.kind_ = KernelKind::LinearFeatures;
  spec.features_ = std::make_shared<const std::vector<FeatureFn>>(std::move(features));
  return spec;
}

KernelSpec KernelSpec::polynomial(int degree) {
  if (degree < 0) {
    throw BoundError(ErrorKind::InvalidInput, "polynomial degree must be >= 0",
                     static_cast<double>(degree));
  }
  std::vector<FeatureFn> features;
  features.reserve(static_cast<size_t>(degree) + 1);
  for (int power = 0; power <= degree; ++power) {
    features.push_back([power](const PointRef& x) {
      if (x.size() != 1) {
        throw BoundError(ErrorKind::InvalidInput,
                         "polynomial feature kernel expects scalar inputs",
                         static_cast<double>(x.size()));
      }
      return std::pow(x[0], power);
    });
  }
  return linear_features(std::move(features));
}

KernelSpec KernelSpec::scaled(KernelSpec base, double output_scale) {
  if (!(output_scale > 0.0)) {
    throw BoundError(ErrorKind::InvalidInput, "output scale must be > 0", output_scale);
  }
  KernelSpec spec;
  spec.kind_ = KernelKind::Scaled;
  spec.output_scale_ = output_scale;
  spec.base_ = std::make_shared<const KernelSpec>(std::move(base));
  return spec;
}

double KernelSpec::lengthscale() const {
  if (kind_ != KernelKind::SquaredExponential) {
    throw BoundError(ErrorKind::InvalidInput, "lengthscale only defined for SE kernels");
  }
  return lengthscale_;
}

double KernelSpec::output_scale() const {
  if (kind_ != KernelKind::Scaled) {
    throw BoundError(ErrorKind::InvalidInput, "output_scale only defined for scaled kernels");
  }
  return output_scale_;
}

const KernelSpec& KernelSpec::base() const {
  if (kind_ != KernelKind::Scaled || !base_) {
    throw BoundError(ErrorKind::InvalidInput, "base only defined for scaled kernels");
  }
  return *base_;
}

int KernelSpec::feature_count() const {
  switch (kind_) {
    case KernelKind::LinearFeatures:
      return static_cast<int>(features_->size());
    case KernelKind::Scaled:
      return base().feature_count();
    default:
      throw BoundError(ErrorKind::InvalidInput, "kernel has no finite feature expansion");
  }
}

Vector KernelSpec::features_at(const PointRef& x) const {
  switch (kind_) {
    case KernelKind::LinearFeatures: {
      Vector phi(static_cast<Eigen::Index>(features_->size()));
      for (size_t i = 0; i < features_->size(); ++i) {
        phi[static_cast<Eigen::Index>(i)] = (*features_)[i](x);
      }
      return phi;
    }
    case KernelKind::Scaled:
      return std::sqrt(output_scale_) * base().features_at(x);
    default:
      throw BoundError(ErrorKind::InvalidInput, "kernel has no finite feature expansion");
  }
}

double KernelSpec::operator()(const PointRef& x, const PointRef& x2) const {
  if (x.size() != x2.size()) {
    throw BoundError(ErrorKind::InvalidInput, "kernel_eval: point dimensions differ",
                     static_cast<double>(x.size() - x2.size()));
  }
  switch (kind_) {
    case KernelKind::SquaredExponential:
      return std::exp(-(x - x2).squaredNorm() / (lengthscale_ * lengthscale_));
    case KernelKind::Dirac:
      return points_equal(x, x2) ? 1.0 : 0.0;
    case KernelKind::LinearFeatures:
      return features_at(x).dot(features_at(x2));
    case KernelKind::Scaled:
      return output_scale_ * (*base_)(x, x2);
  }
  return 0.0;
}

double kernel_eval(const KernelSpec& spec, const PointRef& x, const PointRef& x2) {
  return spec(x, x2);
}

Matrix gram_matrix(const KernelSpec& spec, const Matrix& rows, const Matrix& cols) {
  if (rows.rows() > 0 && cols.rows() > 0 && rows.cols() != cols.cols()) {
    throw BoundError(ErrorKind::InvalidInput, "gram_matrix: point dimensions differ");
  }
  Matrix gram(rows.rows(), cols.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < cols.rows(); ++j) {
      gram(i, j) = spec(rows.row(i).transpose(), cols.row(j).transpose());
    }
  }
  return gram;
}

Matrix gram_matrix(const KernelSpec& spec, const Matrix& points) {
  const Eigen::Index n = points.rows();
  Matrix gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double value = spec(points.row(i).transpose(), points.row(j).transpose());
      gram(i, j) = value;
      gram(j, i) = value;
    }
  }
  return gram;
}

Vector gram_column(const KernelSpec& spec, const Matrix& points, const PointRef& query) {
  Vector column(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    column[i] = spec(points.row(i).transpose(), query);
  }
  return column;
}

}  // namespace rkhsbound
