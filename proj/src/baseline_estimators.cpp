#include "ersecov/baseline_estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ersecov {

namespace {

// pi_hat = (1/L) sum_t ||x_t x_t' - S||_F^2 over demeaned rows.
double plug_in_pi(const Eigen::Ref<const Eigen::MatrixXd>& window,
                  const Eigen::MatrixXd& sample_cov) {
  const Eigen::Index T = window.rows();
  const Eigen::VectorXd mean = window.colwise().mean();
  double pi_hat = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    const Eigen::VectorXd x = window.row(t).transpose() - mean;
    pi_hat += (x * x.transpose() - sample_cov).squaredNorm();
  }
  return pi_hat / static_cast<double>(T);
}

double clipped_intensity(double pi_hat, double gamma_hat, double L) {
  if (!(gamma_hat > 1e-14)) return 0.0;  // target equals S: fixed point
  return std::clamp(pi_hat / (L * gamma_hat), 0.0, 1.0);
}

CovarianceEstimate finish_linear(std::string label, Eigen::MatrixXd cov) {
  CovarianceEstimate est;
  est.label = std::move(label);
  est.covariance = std::move(cov);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      est.covariance, Eigen::EigenvaluesOnly);
  est.eigenvalues_hat = solver.eigenvalues();
  const double lo = est.eigenvalues_hat(0);
  est.condition_number =
      lo > 0.0 ? est.eigenvalues_hat(est.eigenvalues_hat.size() - 1) / lo
               : std::numeric_limits<double>::infinity();
  return est;
}

}  // namespace

const std::vector<std::string>& implemented_estimator_labels() {
  static const std::vector<std::string> labels{"SAMPLE", "EW", "LIN1P",
                                               "LINC", "ERSE"};
  return labels;
}

const std::vector<std::string>& recognized_unimplemented_labels() {
  static const std::vector<std::string> labels{"LIN2P", "LIND", "LINM",
                                               "GIS", "LIS", "QIS"};
  return labels;
}

CovarianceEstimate sample_estimate(const SampleMoments& moments) {
  CovarianceEstimate est;
  est.label = "SAMPLE";
  est.covariance = moments.covariance;
  est.eigenvalues_hat = spectral_decompose(moments).eigenvalues;
  est.condition_number = try_condition_number(moments.covariance);
  return est;
}

CovarianceEstimate lin1p_estimate(
    const Eigen::Ref<const Eigen::MatrixXd>& window) {
  const SampleMoments m = sample_moments(window);
  const Eigen::Index n = m.covariance.rows();
  const double L = static_cast<double>(window.rows());

  const double mu = m.covariance.trace() / static_cast<double>(n);
  const Eigen::MatrixXd target =
      mu * Eigen::MatrixXd::Identity(n, n);
  const double pi_hat = plug_in_pi(window, m.covariance);
  const double gamma_hat = (m.covariance - target).squaredNorm();
  const double rho = clipped_intensity(pi_hat, gamma_hat, L);

  Eigen::MatrixXd cov = rho * target + (1.0 - rho) * m.covariance;
  return finish_linear("LIN1P", std::move(cov));
}

CovarianceEstimate lin1p_estimate(const ReturnsPanel& panel) {
  return lin1p_estimate(panel.returns);
}

CovarianceEstimate linc_estimate(
    const Eigen::Ref<const Eigen::MatrixXd>& window) {
  const SampleMoments m = sample_moments(window);  // rejects zero variance
  const Eigen::Index n = m.covariance.rows();
  const double L = static_cast<double>(window.rows());

  double rbar = 0.0;
  if (n > 1) {
    rbar = (m.correlation.sum() - static_cast<double>(n)) /
           (static_cast<double>(n) * static_cast<double>(n - 1));
  }
  Eigen::MatrixXd target =
      rbar * (m.std_diag * m.std_diag.transpose());
  target.diagonal() = m.covariance.diagonal();

  const double pi_hat = plug_in_pi(window, m.covariance);
  const double gamma_hat = (m.covariance - target).squaredNorm();
  const double rho = clipped_intensity(pi_hat, gamma_hat, L);

  Eigen::MatrixXd cov = rho * target + (1.0 - rho) * m.covariance;
  cov.diagonal() = m.covariance.diagonal();
  return finish_linear("LINC", std::move(cov));
}

CovarianceEstimate linc_estimate(const ReturnsPanel& panel) {
  return linc_estimate(panel.returns);
}

}  // namespace ersecov
