#include "ersecov/erse_estimator.hpp"

#include <cmath>

namespace ersecov {

namespace {

Eigen::Index argmin_lowest(const Eigen::VectorXd& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v(i) < v(best)) best = i;
  return best;
}

Eigen::Index argmax_lowest(const Eigen::VectorXd& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = i;
  return best;
}

}  // namespace

CovarianceEstimate erse(const SampleMoments& moments,
                        const ErseConfig& config) {
  if (config.delta < 0.0 || config.delta > 1.0)
    throw std::invalid_argument("erse: delta must lie in [0, 1]");
  if (config.tolerance < 0.0)
    throw std::invalid_argument("erse: tolerance must be >= 0");

  const SpectralModel model = spectral_decompose(moments);
  const Eigen::Index n = model.eigenvalues.size();
  const int max_iter = config.max_iterations >= 0
                           ? config.max_iterations
                           : static_cast<int>(n) - 1;

  Eigen::MatrixXd q_hat = model.eigenvectors;
  Eigen::VectorXd degrees =
      q_hat.colwise().sum().array().square().matrix();
  Eigen::VectorXd lambda_cur = model.eigenvalues;

  std::vector<RotationStep> trace;
  int iterations = 0;
  Eigen::Index i_min = argmin_lowest(degrees);
  while (degrees(i_min) < config.delta - config.tolerance) {
    if (iterations >= max_iter)
      throw std::logic_error(
          "erse: iteration cap " + std::to_string(max_iter) +
          " reached; the loop should finish within n - 1 rotations");
    const Eigen::Index i_max = argmax_lowest(degrees);
    if (degrees(i_min) + degrees(i_max) < 2.0 * config.delta - 1e-12)
      throw ErseInfeasibleError(
          "erse: infeasible pair at iteration " +
              std::to_string(iterations + 1) + ": T_min + T_max = " +
              std::to_string(degrees(i_min) + degrees(i_max)) +
              " <= 2*delta = " + std::to_string(2.0 * config.delta),
          trace);

    PerResult r = per(q_hat.col(i_min), q_hat.col(i_max), config.delta,
                      lambda_cur(i_min), lambda_cur(i_max),
                      static_cast<int>(i_min), static_cast<int>(i_max));
    q_hat.col(i_min) = r.q1_hat;
    q_hat.col(i_max) = r.q2_hat;
    degrees(i_min) = r.step.t_after[0];
    degrees(i_max) = r.step.t_after[1];
    lambda_cur(i_min) = r.step.lambda_after[0];
    lambda_cur(i_max) = r.step.lambda_after[1];
    trace.push_back(std::move(r.step));
    ++iterations;
    i_min = argmin_lowest(degrees);
  }

  // Revised eigenvalues from the rotated vectors, reconstruction from the
  // original sample eigenvectors.
  const Eigen::MatrixXd rq = moments.correlation * q_hat;
  Eigen::VectorXd lambda_hat(n);
  for (Eigen::Index i = 0; i < n; ++i)
    lambda_hat(i) = q_hat.col(i).dot(rq.col(i));

  Eigen::MatrixXd r_hat = model.eigenvectors *
                          lambda_hat.asDiagonal() *
                          model.eigenvectors.transpose();
  r_hat = 0.5 * (r_hat + r_hat.transpose()).eval();
  Eigen::MatrixXd sigma_hat = moments.std_diag.asDiagonal() * r_hat *
                              moments.std_diag.asDiagonal();
  sigma_hat = 0.5 * (sigma_hat + sigma_hat.transpose()).eval();

  CovarianceEstimate estimate;
  estimate.label = "ERSE";
  estimate.covariance = std::move(sigma_hat);
  estimate.eigenvalues_hat = std::move(lambda_hat);
  estimate.rotation_trace = std::move(trace);
  estimate.condition_number = try_condition_number(estimate.covariance);
  estimate.iterations = iterations;
  return estimate;
}

std::vector<ShrinkageTraceRecord> shrinkage_trace_report(
    const CovarianceEstimate& estimate) {
  std::vector<ShrinkageTraceRecord> records;
  records.reserve(estimate.rotation_trace.size());
  int k = 0;
  for (const auto& step : estimate.rotation_trace) {
    ShrinkageTraceRecord rec;
    rec.step = ++k;
    rec.index_low = step.index_low;
    rec.index_high = step.index_high;
    rec.gamma = step.gamma;
    rec.lambda_before = step.lambda_before;
    rec.lambda_after = step.lambda_after;
    records.push_back(rec);
  }
  return records;
}

std::vector<DeltaSweepEntry> erse_delta_sweep(
    const SampleMoments& moments, const std::vector<double>& deltas) {
  std::vector<DeltaSweepEntry> entries;
  entries.reserve(deltas.size());
  for (double d : deltas) {
    DeltaSweepEntry entry;
    entry.delta = d;
    try {
      ErseConfig cfg;
      cfg.delta = d;
      entry.estimate = erse(moments, cfg);
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

}  // namespace ersecov
