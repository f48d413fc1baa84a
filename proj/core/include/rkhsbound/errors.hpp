#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rkhsbound {

enum class ErrorKind {
  InvalidInput,
  NotPSD,
  NotPD,
  HypothesisFalsified,
  NumericalBreakdown,
  OptimizerFailed,
  OracleInconclusive,
  RunDegraded,
};

const char* to_string(ErrorKind kind);

// Exception carrying the shared error taxonomy. The context string holds
// whatever is needed to reproduce the failure (seed, sigma, query index);
// the payload is the offending number (minimum eigenvalue, -beta^2, ...).
class BoundError : public std::runtime_error {
 public:
  BoundError(ErrorKind kind, const std::string& context, double payload = 0.0);

  ErrorKind kind() const noexcept { return kind_; }
  double payload() const noexcept { return payload_; }

 private:
  ErrorKind kind_;
  double payload_;
};

struct SigmaProbe {
  double sigma = 0.0;
  double beta_sq = 0.0;
};

// Diagnostic produced when beta^2 < 0 at every probed sigma, i.e. the data
// cannot be explained by the assumed budgets.
struct FalsificationDiagnostic {
  double best_sigma = 0.0;        // least-violated probe
  double min_violation = 0.0;     // -beta^2 there (positive)
  double inflation_factor = 1.0;  // c >= 1: scaling both budgets by c restores
                                  // feasibility at best_sigma
};

struct ProblemData;

FalsificationDiagnostic classify_falsification(const ProblemData& data,
                                               const std::vector<SigmaProbe>& probes);

std::string describe(const FalsificationDiagnostic& diag);

}  // namespace rkhsbound
