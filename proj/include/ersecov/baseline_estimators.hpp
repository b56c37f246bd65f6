#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ersecov/erse_estimator.hpp"
#include "ersecov/returns_panel.hpp"
#include "ersecov/spectral_core.hpp"

namespace ersecov {

// Comparison estimators for the backtest: the sample covariance, linear
// shrinkage toward the scaled identity (LIN1P) and toward the constant-
// correlation target (LINC). Shrinkage intensities use the plug-in
// pi_hat / (L * gamma_hat) with pi_hat = (1/L) sum_t ||x_t x_t' - S||_F^2
// over demeaned observations and gamma_hat = ||S - F||_F^2, clipped to
// [0, 1].

// Labels the toolkit fits directly.
const std::vector<std::string>& implemented_estimator_labels();

// Labels kept in comparison tables as explicit N/A rows.
const std::vector<std::string>& recognized_unimplemented_labels();

// The sample covariance, passed through unchanged; eigenvalues_hat is the
// correlation spectrum and the condition number is flagged infinite when
// the matrix is singular (n > L).
CovarianceEstimate sample_estimate(const SampleMoments& moments);

// Shrinkage toward mu*I with mu = trace(S)/n; trace is preserved.
CovarianceEstimate lin1p_estimate(
    const Eigen::Ref<const Eigen::MatrixXd>& window);
CovarianceEstimate lin1p_estimate(const ReturnsPanel& panel);

// Shrinkage toward the constant-correlation target F with F_ii = S_ii and
// F_ij = rbar * sqrt(S_ii S_jj); the diagonal of S is preserved exactly.
CovarianceEstimate linc_estimate(
    const Eigen::Ref<const Eigen::MatrixXd>& window);
CovarianceEstimate linc_estimate(const ReturnsPanel& panel);

}  // namespace ersecov
