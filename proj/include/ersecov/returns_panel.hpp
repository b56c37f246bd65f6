#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace ersecov {

// A dated n-asset x T-period matrix of monthly returns in percent — the
// universal input of the toolkit. Dates are opaque ordered labels (YYYYMM);
// nothing downstream does calendar arithmetic, only relative position.
struct ReturnsPanel {
  std::string name;                 // short label, typically the file stem
  std::vector<std::string> dates;   // strictly increasing, one per row
  std::vector<std::string> assets;  // unique identifiers, one per column
  Eigen::MatrixXd returns;          // T x n, percent; all cells finite
  std::string provenance;           // free-text source description

  Eigen::Index n_periods() const { return returns.rows(); }
  Eigen::Index n_assets() const { return returns.cols(); }
};

// Cleaning rules applied at ingestion time.
struct MissingPolicy {
  std::vector<double> missing_markers{-99.99, -999.0};
  int max_missing_per_asset = 10;  // ties at the threshold are kept
  double fill_value = 0.0;
};

// Throws std::invalid_argument when a panel invariant is broken: dates not
// strictly increasing or miscounted, duplicate asset ids, non-finite cells,
// n < 2 or T < 2.
void validate(const ReturnsPanel& panel);

}  // namespace ersecov
