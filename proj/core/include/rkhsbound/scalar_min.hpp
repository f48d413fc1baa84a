#pragma once

#include <functional>

namespace rkhsbound {

struct ScalarMinResult {
  double x = 0.0;
  double fx = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Bounded derivative-free scalar minimization (golden section with successive
// parabolic interpolation). Objective values of +inf are allowed and mark
// infeasible probes; parabolic steps are skipped when any stencil value is
// non-finite.
ScalarMinResult minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                                double tol, int max_iters);

}  // namespace rkhsbound
