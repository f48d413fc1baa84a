#include "rkhsbound/scalar_min.hpp"

#include <cmath>
#include <limits>

#include "rkhsbound/errors.hpp"

namespace rkhsbound {

// Classic Brent fminbnd, hardened against non-finite objective values.
ScalarMinResult minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                                double tol, int max_iters) {
  if (!(lo < hi)) {
    throw BoundError(ErrorKind::InvalidInput, "minimize_scalar: empty interval");
  }
  const double golden = 0.5 * (3.0 - std::sqrt(5.0));
  const double eps = std::sqrt(std::numeric_limits<double>::epsilon());

  ScalarMinResult result;
  double a = lo, b = hi;
  double x = a + golden * (b - a);
  double w = x, v = x;
  double fx = f(x);
  ++result.evaluations;
  double fw = fx, fv = fx;
  double d = 0.0, e = 0.0;

  for (int iter = 0; iter < max_iters; ++iter) {
    const double mid = 0.5 * (a + b);
    const double tol1 = eps * std::abs(x) + tol / 3.0;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - mid) <= tol2 - 0.5 * (b - a)) {
      result.converged = true;
      break;
    }

    bool use_golden = true;
    if (std::abs(e) > tol1 && std::isfinite(fx) && std::isfinite(fw) && std::isfinite(fv)) {
      // Parabolic fit through (x, fx), (w, fw), (v, fv).
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_prev = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u_trial = x + d;
        if (u_trial - a < tol2 || b - u_trial < tol2) {
          d = (mid > x) ? tol1 : -tol1;
        }
        use_golden = false;
      }
    }
    if (use_golden) {
      e = (x < mid) ? b - x : a - x;
      d = golden * e;
    }

    const double u = (std::abs(d) >= tol1) ? x + d : x + ((d > 0.0) ? tol1 : -tol1);
    const double fu = f(u);
    ++result.evaluations;

    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }

  result.x = x;
  result.fx = fx;
  return result;
}

}  // namespace rkhsbound
