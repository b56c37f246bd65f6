#include "ersecov/spectral_core.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ersecov {

namespace {

constexpr double kEigClamp = 1e-8;

void check_square_symmetric(const Eigen::Ref<const Eigen::MatrixXd>& m,
                            const char* what) {
  if (m.rows() != m.cols())
    throw std::invalid_argument(std::string(what) + ": matrix not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale)
    throw std::invalid_argument(std::string(what) +
                                ": matrix not symmetric (max asymmetry " +
                                std::to_string(asym) + ")");
}

Eigen::VectorXd symmetric_eigenvalues(
    const Eigen::Ref<const Eigen::MatrixXd>& m, const char* what) {
  check_square_symmetric(m, what);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) + ": eigensolver failed");
  return solver.eigenvalues();
}

}  // namespace

SampleMoments sample_moments(const Eigen::Ref<const Eigen::MatrixXd>& window,
                             const std::vector<std::string>* asset_names) {
  const Eigen::Index T = window.rows();
  const Eigen::Index n = window.cols();
  if (T < 2) throw std::invalid_argument("sample_moments: needs T >= 2");
  if (n < 1) throw std::invalid_argument("sample_moments: needs n >= 1");

  SampleMoments m;
  m.mean = window.colwise().mean();
  const Eigen::MatrixXd centered = window.rowwise() - m.mean.transpose();

  m.covariance = Eigen::MatrixXd::Zero(n, n);
  m.covariance.selfadjointView<Eigen::Lower>().rankUpdate(
      centered.transpose(), 1.0 / static_cast<double>(T - 1));
  m.covariance = m.covariance.selfadjointView<Eigen::Lower>();

  m.std_diag = m.covariance.diagonal().cwiseSqrt();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(m.std_diag(j) > 0.0)) {
      std::string id = asset_names && j < static_cast<Eigen::Index>(
                                              asset_names->size())
                           ? (*asset_names)[static_cast<std::size_t>(j)]
                           : "column " + std::to_string(j + 1);
      throw std::invalid_argument(
          "sample_moments: zero standard deviation (constant column) for " +
          id);
    }
  }

  const Eigen::VectorXd inv_sd = m.std_diag.cwiseInverse();
  m.correlation =
      inv_sd.asDiagonal() * m.covariance * inv_sd.asDiagonal();
  m.correlation = 0.5 * (m.correlation + m.correlation.transpose()).eval();
  m.correlation.diagonal().setOnes();
  return m;
}

SampleMoments sample_moments(const ReturnsPanel& panel) {
  return sample_moments(panel.returns, &panel.assets);
}

SpectralModel spectral_decompose(const SampleMoments& moments) {
  const Eigen::Index n = moments.correlation.rows();
  check_square_symmetric(moments.correlation, "spectral_decompose");
  if ((moments.correlation.diagonal().array() - 1.0).abs().maxCoeff() > 1e-12)
    throw std::invalid_argument(
        "spectral_decompose: correlation diagonal is not 1");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(moments.correlation);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("spectral_decompose: eigensolver failed");

  SpectralModel model;
  model.moments = moments;
  model.eigenvalues = solver.eigenvalues();  // ascending
  model.eigenvectors = solver.eigenvectors();

  for (Eigen::Index i = 0; i < n; ++i) {
    double& lam = model.eigenvalues(i);
    if (lam < -kEigClamp)
      throw std::invalid_argument(
          "spectral_decompose: negative eigenvalue " + std::to_string(lam) +
          " beyond roundoff; input is not a correlation matrix");
    if (lam < 0.0) lam = 0.0;
  }

  // Sign convention: projection onto the uniform vector >= 0; exact zero
  // broken by the first nonzero component.
  for (Eigen::Index i = 0; i < n; ++i) {
    auto col = model.eigenvectors.col(i);
    const double s = col.sum();
    bool flip = s < 0.0;
    if (s == 0.0) {
      for (Eigen::Index k = 0; k < n; ++k) {
        if (col(k) != 0.0) {
          flip = col(k) < 0.0;
          break;
        }
      }
    }
    if (flip) col = -col;
  }
  return model;
}

double deviation_degree(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double norm = x.norm();
  if (std::abs(norm - 1.0) > 1e-8)
    throw std::invalid_argument("deviation_degree: input is not a unit "
                                "vector (||x|| = " + std::to_string(norm) +
                                ")");
  const double s = x.sum();
  return s * s;
}

DeviationProfile deviation_profile(const SpectralModel& model) {
  DeviationProfile profile;
  profile.degrees =
      model.eigenvectors.colwise().sum().array().square().matrix();
  profile.total = profile.degrees.sum();
  return profile;
}

double mean_correlation(const SampleMoments& moments) {
  const double n = static_cast<double>(moments.correlation.rows());
  return moments.correlation.sum() / (n * n);
}

double condition_number(const Eigen::Ref<const Eigen::MatrixXd>& matrix) {
  const Eigen::VectorXd ev = symmetric_eigenvalues(matrix, "condition_number");
  const double lo = ev(0);
  const double hi = ev(ev.size() - 1);
  if (!(lo > 0.0))
    throw std::invalid_argument(
        "condition_number: smallest eigenvalue " + std::to_string(lo) +
        " is not positive (singular or indefinite matrix)");
  return hi / lo;
}

double try_condition_number(const Eigen::Ref<const Eigen::MatrixXd>& matrix) {
  const Eigen::VectorXd ev =
      symmetric_eigenvalues(matrix, "try_condition_number");
  const double lo = ev(0);
  const double hi = ev(ev.size() - 1);
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

DominanceCheck dominance_check(const SpectralModel& model,
                               const SampleMoments& moments) {
  const Eigen::Index n = model.eigenvalues.size();
  DominanceCheck check;
  check.lambda_max = model.eigenvalues(n - 1);
  check.t_max = deviation_degree(model.eigenvectors.col(n - 1));
  check.n_mean_corr = static_cast<double>(n) * mean_correlation(moments);
  check.assumption1_satisfied = (moments.correlation.array() > 0.0).all();
  // 1e-8 slack absorbs roundoff at the equality cases (all-ones R).
  check.holds = (check.t_max + 1e-8 >= check.lambda_max) &&
                (check.lambda_max + 1e-8 >= check.n_mean_corr);
  return check;
}

WeakFactorBounds weak_factor_bounds(const SampleMoments& moments) {
  const Eigen::MatrixXd& R = moments.correlation;
  const Eigen::Index n = R.rows();
  const double nd = static_cast<double>(n);

  WeakFactorBounds out;
  double best_ratio = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = R.row(i).sum();
    const double ss = R.row(i).squaredNorm();
    best_ratio = std::max(best_ratio, s * s / ss);
  }
  out.bound_rows = nd - best_ratio;

  double b = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    b = std::max(b, R.row(i).minCoeff());
  out.b = b;
  const double num = 1.0 + (nd - 1.0) * b;
  const double den = 1.0 + (nd - 1.0) * b * b;
  out.bound_b = nd - num * num / den;
  return out;
}

}  // namespace ersecov
