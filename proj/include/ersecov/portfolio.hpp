#pragma once

#include <Eigen/Dense>
#include <string>

#include "ersecov/erse_estimator.hpp"

namespace ersecov {

// A budget-feasible portfolio: weights sum to 1, short positions allowed.
struct WeightVector {
  Eigen::VectorXd weights;
  std::string strategy_label;
};

// Global-minimum-variance weights w = Sigma^-1 1 / (1' Sigma^-1 1), via a
// symmetric positive-definite solve (never an explicit inverse). Throws on
// singular or numerically indefinite input, naming the offending
// eigenvalue.
WeightVector gmv_weights(const CovarianceEstimate& estimate);

// All entries 1/n.
WeightVector ew_weights(int n);

// w = q / (1' q) for a unit vector q; ||w||_2 = 1 / sqrt(T(q)). Throws when
// the projection 1'q is within 1e-12 of zero.
WeightVector unit_cost_portfolio(const Eigen::Ref<const Eigen::VectorXd>& q);

}  // namespace ersecov
