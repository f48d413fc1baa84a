#include "rkhsbound/synth.hpp"

#include <cmath>
#include <random>

namespace rkhsbound {

uint64_t derive_seed(uint64_t master, uint64_t index) {
  // splitmix64 over the combined value
  uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Box interval(double lo, double hi) {
  Box box;
  box.lo = Vector::Constant(1, lo);
  box.hi = Vector::Constant(1, hi);
  return box;
}

double RkhsSample::eval(const PointRef& x) const {
  double value = 0.0;
  for (Eigen::Index i = 0; i < centers.rows(); ++i) {
    value += coefficients[i] * kernel(x, centers.row(i).transpose());
  }
  return value;
}

Vector RkhsSample::eval_rows(const Matrix& points) const {
  Vector values(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    values[i] = eval(points.row(i).transpose());
  }
  return values;
}

RkhsSample sample_rkhs_function(const KernelSpec& kernel, const Box& domain, int centers,
                                double target_norm_sq, uint64_t seed) {
  if (centers < 1) {
    throw BoundError(ErrorKind::InvalidInput, "sample_rkhs_function: need at least one center");
  }
  if (!(target_norm_sq > 0.0)) {
    throw BoundError(ErrorKind::InvalidInput, "sample_rkhs_function: target norm must be > 0",
                     target_norm_sq);
  }
  const Eigen::Index dim = domain.lo.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (int attempt = 0; attempt < 10; ++attempt) {
    Matrix c(centers, dim);
    for (Eigen::Index i = 0; i < centers; ++i) {
      for (Eigen::Index j = 0; j < dim; ++j) {
        c(i, j) = domain.lo[j] + (domain.hi[j] - domain.lo[j]) * unit(rng);
      }
    }
    bool distinct = true;
    for (Eigen::Index i = 0; i < centers && distinct; ++i) {
      for (Eigen::Index j = i + 1; j < centers; ++j) {
        if (points_equal(c.row(i).transpose(), c.row(j).transpose())) {
          distinct = false;
          break;
        }
      }
    }
    if (!distinct) continue;

    Vector alpha(centers);
    for (Eigen::Index i = 0; i < centers; ++i) alpha[i] = gauss(rng);
    const Matrix k = gram_matrix(kernel, c);
    const double raw_norm_sq = alpha.dot(k * alpha);
    if (!(raw_norm_sq > 1e-12 * alpha.squaredNorm() * std::max(k.trace() / centers, 1e-300))) {
      continue;  // coefficients landed in the numerical null space
    }
    alpha *= std::sqrt(target_norm_sq / raw_norm_sq);

    RkhsSample sample{std::move(c), std::move(alpha), kernel, target_norm_sq};
    return sample;
  }
  throw BoundError(ErrorKind::NumericalBreakdown,
                   "sample_rkhs_function: center Gram matrix numerically singular after retries");
}

Vector sample_noise(const NoiseModel& model, Eigen::Index count) {
  Vector w = Vector::Zero(count);
  if (model.kind == NoiseKind::None) return w;
  if (!(model.epsilon > 0.0)) {
    throw BoundError(ErrorKind::InvalidInput, "sample_noise: epsilon must be > 0",
                     model.epsilon);
  }
  std::mt19937_64 rng(model.seed);
  std::normal_distribution<double> gauss(0.0, model.epsilon);
  for (Eigen::Index i = 0; i < count; ++i) {
    double draw = gauss(rng);
    while (std::abs(draw) > model.epsilon) draw = gauss(rng);
    w[i] = draw;
  }
  return w;
}

ProblemData make_dataset(const RkhsSample& f, const NoiseModel& noise, const Matrix& inputs) {
  const Eigen::Index n = inputs.rows();
  const Vector w = sample_noise(noise, n);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y[i] = f.eval(inputs.row(i).transpose()) + w[i];
  }
  const double eps = noise.kind == NoiseKind::None ? 0.0 : noise.epsilon;
  const double gamma_w_sq = std::max(static_cast<double>(n) * eps * eps, 1e-12);
  return make_problem_data(inputs, y, f.kernel, KernelSpec::dirac(), f.norm_sq, gamma_w_sq);
}

Matrix sample_distinct_inputs(const Box& domain, int count, uint64_t seed) {
  const Eigen::Index dim = domain.lo.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix inputs(count, dim);
  for (Eigen::Index i = 0; i < count; ++i) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 1000) {
        throw BoundError(ErrorKind::NumericalBreakdown,
                         "sample_distinct_inputs: could not find a distinct point");
      }
      for (Eigen::Index j = 0; j < dim; ++j) {
        inputs(i, j) = domain.lo[j] + (domain.hi[j] - domain.lo[j]) * unit(rng);
      }
      bool distinct = true;
      for (Eigen::Index j = 0; j < i; ++j) {
        if (points_equal(inputs.row(i).transpose(), inputs.row(j).transpose())) {
          distinct = false;
          break;
        }
      }
      if (distinct) break;
    }
  }
  return inputs;
}

Matrix grid_inputs(double lo, double hi, int count) {
  if (count < 1) {
    throw BoundError(ErrorKind::InvalidInput, "grid_inputs: count must be >= 1");
  }
  Matrix grid(count, 1);
  if (count == 1) {
    grid(0, 0) = 0.5 * (lo + hi);
    return grid;
  }
  for (int i = 0; i < count; ++i) {
    grid(i, 0) = lo + (hi - lo) * i / (count - 1);
  }
  return grid;
}

}  // namespace rkhsbound
