#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ersecov/per_rotation.hpp"
#include "ersecov/spectral_core.hpp"

namespace ersecov {

struct ErseConfig {
  double delta = 0.25;       // minimum allowable deviation degree, in [0, 1]
  double tolerance = 1e-12;  // slack in the loop test T < delta - tolerance
  int max_iterations = -1;   // cap on PER applications; -1 means n - 1
};

// An estimator's output: the reconstructed covariance, the revised
// eigenvalue vector, the rotation trace that produced it, and diagnostics.
//
// eigenvalues_hat lives in the frame the estimator acts on: the correlation
// frame for SAMPLE and ERSE (so the entries sum to n), the covariance frame
// for the linear-shrinkage baselines. condition_number is always the ratio
// of extreme eigenvalues of `covariance` itself, +infinity when singular.
struct CovarianceEstimate {
  std::string label;
  Eigen::MatrixXd covariance;
  Eigen::VectorXd eigenvalues_hat;
  std::vector<RotationStep> rotation_trace;
  double condition_number = 0.0;
  int iterations = 0;
};

// Terminal failure of the rotation loop: a pair with T_min + T_max <= 2*delta
// was selected, which the feasibility footnote of the algorithm excludes.
// Possible only for delta near 1; the trace accumulated so far is attached.
class ErseInfeasibleError : public std::runtime_error {
 public:
  ErseInfeasibleError(const std::string& what,
                      std::vector<RotationStep> partial)
      : std::runtime_error(what), partial_trace(std::move(partial)) {}
  std::vector<RotationStep> partial_trace;
};

// The estimator: while the smallest deviation degree is below delta, pair
// that eigenvector with the one of largest deviation and rotate (ties on
// either side break toward the lowest column index). The revised
// eigenvalues are the quadratic forms of the rotated vectors in the sample
// correlation matrix; the covariance is rebuilt from the ORIGINAL sample
// eigenvectors with those revised eigenvalues.
CovarianceEstimate erse(const SampleMoments& moments,
                        const ErseConfig& config = {});

struct ShrinkageTraceRecord {
  int step = 0;  // 1-based position in the trace
  int index_low = -1;
  int index_high = -1;
  double gamma = 0.0;
  std::array<double, 2> lambda_before{};
  std::array<double, 2> lambda_after{};
};

// The per-step linear-shrinkage view of an estimate's rotation trace: each
// record's lambda_after is the gamma-convex combination of lambda_before,
// so the eigenvalue gap shrinks while the pair sum is preserved.
std::vector<ShrinkageTraceRecord> shrinkage_trace_report(
    const CovarianceEstimate& estimate);

struct DeltaSweepEntry {
  double delta = 0.0;
  std::optional<CovarianceEstimate> estimate;  // empty on per-delta failure
  std::string error;
};

// One independent estimate per delta; per-delta failures are reported in
// the entry without aborting the sweep.
std::vector<DeltaSweepEntry> erse_delta_sweep(const SampleMoments& moments,
                                              const std::vector<double>& deltas);

}  // namespace ersecov
