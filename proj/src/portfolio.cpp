#include "ersecov/portfolio.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace ersecov {

WeightVector gmv_weights(const CovarianceEstimate& estimate) {
  const Eigen::MatrixXd& cov = estimate.covariance;
  const Eigen::Index n = cov.rows();
  if (n < 1) throw std::invalid_argument("gmv_weights: empty covariance");

  auto fail_with_eigenvalue = [&](const char* reason) -> void {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        cov, Eigen::EigenvaluesOnly);
    throw std::invalid_argument(
        std::string("gmv_weights[") + estimate.label + "]: " + reason +
        " (smallest eigenvalue " + std::to_string(solver.eigenvalues()(0)) +
        ")");
  };

  if (!(estimate.condition_number < std::numeric_limits<double>::infinity()))
    fail_with_eigenvalue("estimate is singular");

  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    fail_with_eigenvalue("factorization failed, matrix not positive definite");

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd y = llt.solve(ones);
  y += llt.solve(ones - cov * y);  // one refinement step

  const double denom = y.sum();
  if (denom == 0.0 || !std::isfinite(denom))
    fail_with_eigenvalue("degenerate solve, 1' Sigma^-1 1 is not finite");

  WeightVector w;
  w.weights = y / denom;
  w.strategy_label = estimate.label;

  const double kappa = 1.0 / denom;
  const double residual = (cov * w.weights - kappa * ones).norm();
  if (residual > 1e-8 * cov.norm())
    fail_with_eigenvalue("solve residual exceeds tolerance, matrix is "
                         "numerically singular");
  return w;
}

WeightVector ew_weights(int n) {
  if (n < 1) throw std::invalid_argument("ew_weights: n must be >= 1");
  WeightVector w;
  w.weights = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  w.strategy_label = "EW";
  return w;
}

WeightVector unit_cost_portfolio(
    const Eigen::Ref<const Eigen::VectorXd>& q) {
  if (std::abs(q.norm() - 1.0) > 1e-8)
    throw std::invalid_argument(
        "unit_cost_portfolio: input is not a unit vector");
  const double s = q.sum();
  if (std::abs(s) <= 1e-12)
    throw std::invalid_argument(
        "unit_cost_portfolio: projection onto the uniform vector is zero");
  WeightVector w;
  w.weights = q / s;
  w.strategy_label = "UNIT_COST";
  return w;
}

}  // namespace ersecov
