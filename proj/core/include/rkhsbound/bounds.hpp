#pragma once

#include <Eigen/Cholesky>
#include <optional>
#include <utility>
#include <vector>

#include "rkhsbound/gp.hpp"

namespace rkhsbound {

enum class Side { Upper, Lower };

// Which RKHS-norm constraints bind at the optimum. Case 1 has a sigma -> inf
// closed form, Case 2 a sigma -> 0 closed form, Case 3 an interior sigma*;
// the tie label marks instances where both closed-form feasibility tests
// pass (the two values then coincide).
enum class CaseLabel {
  Case1_SigmaInf,
  Case2_SigmaZero,
  Case3_Interior,
  Case1And2_Tie,
  Degenerate_ZeroFeature,
};

const char* to_string(CaseLabel label);

struct SigmaOptimizerConfig {
  double log_sigma_min = -8.0;
  double log_sigma_max = 8.0;
  double tol = 1e-10;  // on log10(sigma)
  int max_iters = 200;
  std::vector<double> multistart = {-2.0, 0.0, 2.0};
};

struct BoundResult {
  double upper = 0.0;
  double lower = 0.0;
  double sigma_star_upper = 0.0;  // +inf for Case 1, 0 for Case 2, NaN when degenerate
  double sigma_star_lower = 0.0;
  CaseLabel case_upper = CaseLabel::Case3_Interior;
  CaseLabel case_lower = CaseLabel::Case3_Interior;
  int relaxed_probe_count = 0;      // optimizer evaluations, both sides
  bool optimizer_converged = true;  // value is valid either way; false only flags
                                    // that a search hit its iteration cap
};

// Relaxed envelope at a fixed noise parameter: mean +/- beta * sqrt(var).
// Throws HypothesisFalsified when beta^2 < 0 at this sigma (the sigma-search
// in optimal_bound instead treats such probes as uninformative).
double relaxed_upper(const ProblemData& data, double sigma, const PointRef& query);
double relaxed_lower(const ProblemData& data, double sigma, const PointRef& query);

// Closed-form cases and their feasibility tests. The lower side flips the
// sign of the cross-covariance (case 1), of the inflation direction (case 2)
// and of the noise column (corollary).
bool case1_feasible(const ProblemData& data, const PointRef& query, Side side = Side::Upper);
double case1_bound(const ProblemData& data, const PointRef& query, Side side = Side::Upper);

bool case2_feasible(const ProblemData& data, const PointRef& query,
                    const FeatureDecomposition& decomp, Side side = Side::Upper);
double case2_bound(const ProblemData& data, const PointRef& query,
                   const FeatureDecomposition& decomp, Side side = Side::Upper);

// Query equal to training input train_index, invertible latent Gram matrix.
bool corollary_feasible(const ProblemData& data, Eigen::Index train_index,
                        Side side = Side::Upper);
double corollary_bound(const ProblemData& data, Eigen::Index train_index,
                       Side side = Side::Upper);

// Precomputes the per-dataset factorizations once so that repeated queries
// (envelopes, experiments) stay cheap. optimal_bound/envelope are thin
// wrappers around this.
class BoundSolver {
 public:
  explicit BoundSolver(ProblemData data, SigmaOptimizerConfig cfg = SigmaOptimizerConfig{});

  BoundResult at(const PointRef& query) const;

  // {lower, upper} of the relaxed envelope at fixed sigma, through the same
  // spectral cache the optimizer uses.
  std::pair<double, double> relaxed_at(const PointRef& query, double sigma) const;

  const ProblemData& data() const noexcept { return data_; }
  const SigmaSweep& sweep() const noexcept { return sweep_; }
  const SigmaOptimizerConfig& config() const noexcept { return cfg_; }

 private:
  struct SideOutcome {
    double value = 0.0;
    double sigma_star = 0.0;
    CaseLabel label = CaseLabel::Case3_Interior;
    int probes = 0;
    bool converged = true;
  };

  SideOutcome solve_side(const PointRef& query, const Vector& k_star, double k_star_star,
                         Eigen::Index train_idx, const SigmaSweep::QueryCache& qc,
                         std::optional<FeatureDecomposition>& decomp, Side side) const;

  bool span_gate(const Vector& k_star, double k_star_star) const;
  const FeatureDecomposition& full_decomposition(
      const PointRef& query, std::optional<FeatureDecomposition>& decomp) const;

  ProblemData data_;
  SigmaOptimizerConfig cfg_;
  SigmaSweep sweep_;
  NoiseCholesky noise_chol_;
  Matrix kf_train_;
  Vector kw_diag_;
  Matrix train_vecs_;
  Vector train_vals_;  // eigenvalues of Kf_train, ascending (Eigen order)
  double lambda_max_train_ = 0.0;
  Eigen::LLT<Matrix> kf_llt_;
  bool kf_invertible_ = false;
};

BoundResult optimal_bound(const ProblemData& data, const PointRef& query,
                          const SigmaOptimizerConfig& cfg = SigmaOptimizerConfig{});

struct EnvelopeEntry {
  bool ok = false;
  BoundResult result;
  ErrorKind error_kind = ErrorKind::NumericalBreakdown;
  std::string error;
};

// Maps optimal_bound over the query rows; per-query failures are recorded and
// do not abort the batch.
std::vector<EnvelopeEntry> envelope(const ProblemData& data, const Matrix& queries,
                                    const SigmaOptimizerConfig& cfg = SigmaOptimizerConfig{});

}  // namespace rkhsbound
