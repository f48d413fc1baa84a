#include "rkhsbound/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "rkhsbound/gp.hpp"

namespace rkhsbound {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::NotPD: return "NotPD";
    case ErrorKind::HypothesisFalsified: return "HypothesisFalsified";
    case ErrorKind::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorKind::OptimizerFailed: return "OptimizerFailed";
    case ErrorKind::OracleInconclusive: return "OracleInconclusive";
    case ErrorKind::RunDegraded: return "RunDegraded";
  }
  return "Unknown";
}

BoundError::BoundError(ErrorKind kind, const std::string& context, double payload)
    : std::runtime_error(std::string(to_string(kind)) + ": " + context),
      kind_(kind),
      payload_(payload) {}

FalsificationDiagnostic classify_falsification(const ProblemData& data,
                                               const std::vector<SigmaProbe>& probes) {
  if (probes.empty()) {
    throw BoundError(ErrorKind::InvalidInput, "classify_falsification: no probes");
  }
  FalsificationDiagnostic diag;
  diag.min_violation = std::numeric_limits<double>::infinity();
  for (const auto& probe : probes) {
    if (probe.beta_sq >= 0.0) {
      throw BoundError(ErrorKind::InvalidInput,
                       "classify_falsification: probe is feasible, nothing to classify",
                       probe.beta_sq);
    }
    if (-probe.beta_sq < diag.min_violation) {
      diag.min_violation = -probe.beta_sq;
      diag.best_sigma = probe.sigma;
    }
  }
  // beta^2 = Gf^2 + Gw^2/s^2 - ||g||^2 is jointly linear in the budgets, so
  // scaling both by c = ||g||^2 / (Gf^2 + Gw^2/s^2) zeroes it at the probe.
  const double budget =
      data.gamma_f_sq + data.gamma_w_sq / (diag.best_sigma * diag.best_sigma);
  const double interpolant_norm = budget + diag.min_violation;
  diag.inflation_factor = interpolant_norm / budget;
  return diag;
}

std::string describe(const FalsificationDiagnostic& diag) {
  std::ostringstream out;
  out << "data falsify the budget hypothesis: min over probed sigma of -beta^2 = "
      << diag.min_violation << " at sigma = " << diag.best_sigma
      << "; scaling both budgets by " << diag.inflation_factor
      << " restores feasibility there";
  return out.str();
}

}  // namespace rkhsbound
