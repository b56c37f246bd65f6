#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ersecov/returns_panel.hpp"

namespace ersecov {

// Sample moments of a return window. The covariance uses the L-1
// denominator; the correlation is the covariance rescaled by the inverse
// standard deviations, with an exact unit diagonal.
struct SampleMoments {
  Eigen::VectorXd mean;         // n, percent
  Eigen::MatrixXd covariance;   // n x n, percent^2
  Eigen::VectorXd std_diag;     // n, sample standard deviations, all > 0
  Eigen::MatrixXd correlation;  // n x n, unit diagonal
};

// The correlation matrix's spectral decomposition. Eigenvalues are sorted
// ascending and each eigenvector column is sign-normalized so that its
// projection onto the uniform vector is >= 0 (tie at exactly zero broken by
// making the first nonzero component positive). The convention makes the
// decomposition deterministic for simple spectra; downstream rotation
// results depend on it only through reproducibility, never through values.
struct SpectralModel {
  SampleMoments moments;
  Eigen::VectorXd eigenvalues;   // ascending, clamped to [0, inf)
  Eigen::MatrixXd eigenvectors;  // orthonormal columns, aligned with values
};

// Deviation degrees T(q_i) of the eigenvector columns from the null space
// of the uniform vector; their total equals n.
struct DeviationProfile {
  Eigen::VectorXd degrees;
  double total = 0.0;
};

struct DominanceCheck {
  double t_max = 0.0;       // T(q_n), deviation of the dominant eigenvector
  double lambda_max = 0.0;  // largest eigenvalue
  double n_mean_corr = 0.0; // n * M(R)
  bool holds = false;       // t_max >= lambda_max >= n_mean_corr (1e-8 slack)
  bool assumption1_satisfied = false;  // all correlations strictly positive
};

struct WeakFactorBounds {
  double bound_rows = 0.0;  // n - max_i (1'rho_i)^2 / (rho_i'rho_i)
  double bound_b = 0.0;     // n - (1+(n-1)b)^2 / (1+(n-1)b^2)
  double b = 0.0;           // max_i min_j rho_ij
};

// Computes mean, covariance (L-1 denominator), standard deviations and
// correlation. Throws std::invalid_argument for T < 2 or a constant column
// (the error names the offending asset or column).
SampleMoments sample_moments(const Eigen::Ref<const Eigen::MatrixXd>& window,
                             const std::vector<std::string>* asset_names =
                                 nullptr);
SampleMoments sample_moments(const ReturnsPanel& panel);

// Spectral decomposition of moments.correlation with the sign convention
// above. Eigenvalues in [-1e-8, 0) are clamped to zero; anything below
// -1e-8 is rejected (sample correlation matrices are PSD up to roundoff).
SpectralModel spectral_decompose(const SampleMoments& moments);

// T(x) = (1_n' x)^2 for a unit vector x; result in [0, n]. Throws when
// ||x|| differs from 1 by more than 1e-8.
double deviation_degree(const Eigen::Ref<const Eigen::VectorXd>& x);

DeviationProfile deviation_profile(const SpectralModel& model);

// M(R) = 1' R 1 / n^2, the mean over all entries including the diagonal.
double mean_correlation(const SampleMoments& moments);

// lambda_max / lambda_min of a symmetric positive-definite matrix. Throws
// on singular or indefinite input.
double condition_number(const Eigen::Ref<const Eigen::MatrixXd>& matrix);

// Same ratio, but +infinity instead of an exception when the smallest
// eigenvalue is not strictly positive. Used where singularity is data, not
// a fault (e.g. the sample covariance with n > L).
double try_condition_number(const Eigen::Ref<const Eigen::MatrixXd>& matrix);

// Evaluates the chain T(q_n) >= lambda_n >= n M(R). Assumption 1 (all
// correlations positive) is verified at call time and reported; violations
// are data, not faults.
DominanceCheck dominance_check(const SpectralModel& model,
                               const SampleMoments& moments);

// Diagnostic upper bounds on the deviation degree of eigenvectors paired
// with (near-)zero eigenvalues.
WeakFactorBounds weak_factor_bounds(const SampleMoments& moments);

}  // namespace ersecov
