#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "ersecov/spectral_core.hpp"
#include "support/synthetic.hpp"

using namespace ersecov;
using testsupport::OneFactorMarket;
using testsupport::random_positive_correlation;
using testsupport::rank_deficient_positive_correlation;

namespace {

SampleMoments moments_from_correlation(const Eigen::MatrixXd& r) {
  SampleMoments m;
  const Eigen::Index n = r.rows();
  m.mean = Eigen::VectorXd::Zero(n);
  m.covariance = r;
  m.std_diag = Eigen::VectorXd::Ones(n);
  m.correlation = r;
  return m;
}

Eigen::MatrixXd equicorrelation(int n, double rho) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Constant(n, n, rho);
  r.diagonal().setOnes();
  return r;
}

}  // namespace

TEST_CASE("sample_moments: two-observation hand computation") {
  Eigen::MatrixXd data(2, 2);
  data << 0, 0, 2, 2;
  const SampleMoments m = sample_moments(data);
  CHECK(m.mean(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.mean(1) == doctest::Approx(1.0).epsilon(1e-14));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      CHECK(m.covariance(i, j) == doctest::Approx(2.0).epsilon(1e-14));
      CHECK(m.correlation(i, j) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("sample_moments: identical columns correlate at one") {
  StableRng rng(7);
  Eigen::MatrixXd data(20, 3);
  for (int t = 0; t < 20; ++t) {
    const double v = rng.next_gaussian();
    data(t, 0) = v;
    data(t, 1) = v;
    data(t, 2) = v;
  }
  const SampleMoments m = sample_moments(data);
  CHECK((m.correlation.array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("sample_moments: independent noise decorrelates at rate 3/sqrt(T)") {
  const int T = 20000;
  StableRng rng(11);
  Eigen::MatrixXd data(T, 4);
  for (int t = 0; t < T; ++t)
    for (int j = 0; j < 4; ++j) data(t, j) = rng.next_gaussian();
  const SampleMoments m = sample_moments(data);
  const double bound = 3.0 / std::sqrt(static_cast<double>(T));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) CHECK(std::abs(m.correlation(i, j)) < bound);
}

TEST_CASE("sample_moments: constant column is rejected by name") {
  Eigen::MatrixXd data(5, 2);
  data.col(0).setLinSpaced(5, 0.0, 4.0);
  data.col(1).setConstant(3.25);
  std::vector<std::string> names{"GOOD", "FLAT"};
  CHECK_THROWS_WITH_AS(sample_moments(data, &names),
                       doctest::Contains("FLAT"), std::invalid_argument);
}

TEST_CASE("sample_moments: moment invariants on simulated panels") {
  StableRng rng(23);
  for (int rep = 0; rep < 10; ++rep) {
    OneFactorMarket market = OneFactorMarket::draw(8, rng);
    const ReturnsPanel panel = market.simulate(60, rng);
    const SampleMoments m = sample_moments(panel);
    const Eigen::MatrixXd recon = m.std_diag.asDiagonal() * m.correlation *
                                  m.std_diag.asDiagonal();
    CHECK((recon - m.covariance).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((m.covariance - m.covariance.transpose()).cwiseAbs().maxCoeff() <
          1e-10);
    CHECK((m.correlation.diagonal().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK((m.std_diag.array() > 0.0).all());
  }
}

TEST_CASE("spectral_decompose: identity") {
  const SampleMoments m = moments_from_correlation(
      Eigen::MatrixXd::Identity(3, 3));
  const SpectralModel model = spectral_decompose(m);
  for (int i = 0; i < 3; ++i)
    CHECK(model.eigenvalues(i) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((model.eigenvectors.transpose() * model.eigenvectors -
         Eigen::MatrixXd::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() < 1e-8);
}

TEST_CASE("spectral_decompose: closed-form 2x2, rho = 0.8") {
  Eigen::MatrixXd r(2, 2);
  r << 1.0, 0.8, 0.8, 1.0;
  const SpectralModel model = spectral_decompose(moments_from_correlation(r));
  CHECK(model.eigenvalues(0) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(model.eigenvalues(1) == doctest::Approx(1.8).epsilon(1e-12));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  // Sign convention: zero-projection column has its first component
  // positive; the dominant column has positive projection.
  CHECK(model.eigenvectors(0, 0) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
  CHECK(model.eigenvectors(1, 0) ==
        doctest::Approx(-inv_sqrt2).epsilon(1e-12));
  CHECK(model.eigenvectors(0, 1) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
  CHECK(model.eigenvectors(1, 1) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
}

TEST_CASE("spectral_decompose: equicorrelation spectrum") {
  const SpectralModel model =
      spectral_decompose(moments_from_correlation(equicorrelation(4, 0.5)));
  CHECK(model.eigenvalues(3) == doctest::Approx(2.5).epsilon(1e-12));
  for (int i = 0; i < 3; ++i)
    CHECK(model.eigenvalues(i) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("spectral_decompose: input validation") {
  SampleMoments bad = moments_from_correlation(equicorrelation(3, 0.4));
  bad.correlation(0, 1) = 0.9;  // asymmetric
  CHECK_THROWS_AS(spectral_decompose(bad), std::invalid_argument);

  SampleMoments diag = moments_from_correlation(equicorrelation(3, 0.4));
  diag.correlation(1, 1) = 1.5;
  CHECK_THROWS_AS(spectral_decompose(diag), std::invalid_argument);

  // Indefinite "correlation" beyond the clamp window.
  Eigen::MatrixXd r(2, 2);
  r << 1.0, 1.2, 1.2, 1.0;
  CHECK_THROWS_AS(spectral_decompose(moments_from_correlation(r)),
                  std::invalid_argument);
}

TEST_CASE("deviation_degree: closed forms") {
  CHECK(deviation_degree(Eigen::VectorXd::Constant(4, 0.5)) ==
        doctest::Approx(4.0).epsilon(1e-12));
  Eigen::VectorXd null_vec(2);
  null_vec << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  CHECK(deviation_degree(null_vec) == doctest::Approx(0.0).epsilon(1e-12));
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(3);
  e1(0) = 1.0;
  CHECK(deviation_degree(e1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(deviation_degree(Eigen::VectorXd::Constant(4, 0.6)),
                  std::invalid_argument);
}

TEST_CASE("deviation_profile: identity, 2x2 and equicorrelation") {
  const SpectralModel id =
      spectral_decompose(moments_from_correlation(
          Eigen::MatrixXd::Identity(3, 3)));
  const DeviationProfile pid = deviation_profile(id);
  for (int i = 0; i < 3; ++i)
    CHECK(pid.degrees(i) == doctest::Approx(1.0).epsilon(1e-10));

  Eigen::MatrixXd r(2, 2);
  r << 1.0, 0.8, 0.8, 1.0;
  const DeviationProfile p2 =
      deviation_profile(spectral_decompose(moments_from_correlation(r)));
  CHECK(p2.degrees(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p2.degrees(1) == doctest::Approx(2.0).epsilon(1e-12));

  const DeviationProfile pe = deviation_profile(
      spectral_decompose(moments_from_correlation(equicorrelation(4, 0.5))));
  CHECK(pe.degrees(3) == doctest::Approx(4.0).epsilon(1e-10));
  for (int i = 0; i < 3; ++i)
    CHECK(pe.degrees(i) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("mean_correlation: closed forms") {
  CHECK(mean_correlation(moments_from_correlation(
            Eigen::MatrixXd::Identity(3, 3))) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(mean_correlation(moments_from_correlation(equicorrelation(2, 0.5))) ==
        doctest::Approx(0.75).epsilon(1e-14));
  CHECK(mean_correlation(moments_from_correlation(equicorrelation(5, 1.0))) ==
        doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("condition_number: closed forms and failure modes") {
  CHECK(condition_number(Eigen::MatrixXd::Identity(3, 3)) ==
        doctest::Approx(1.0).epsilon(1e-12));
  Eigen::MatrixXd d = Eigen::Vector2d(4.0, 1.0).asDiagonal();
  CHECK(condition_number(d) == doctest::Approx(4.0).epsilon(1e-12));
  Eigen::MatrixXd r(2, 2);
  r << 1.0, 0.8, 0.8, 1.0;
  CHECK(condition_number(r) == doctest::Approx(9.0).epsilon(1e-10));

  CHECK_THROWS_AS(condition_number(equicorrelation(3, 1.0)),
                  std::invalid_argument);
  CHECK(std::isinf(try_condition_number(equicorrelation(3, 1.0))));
}

TEST_CASE("dominance_check: equicorrelation and the all-ones equality chain") {
  const SampleMoments ec = moments_from_correlation(equicorrelation(4, 0.5));
  const DominanceCheck c1 = dominance_check(spectral_decompose(ec), ec);
  CHECK(c1.t_max == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(c1.lambda_max == doctest::Approx(2.5).epsilon(1e-10));
  CHECK(c1.n_mean_corr == doctest::Approx(2.5).epsilon(1e-10));
  CHECK(c1.holds);
  CHECK(c1.assumption1_satisfied);

  const SampleMoments ones = moments_from_correlation(equicorrelation(2, 1.0));
  const DominanceCheck c2 = dominance_check(spectral_decompose(ones), ones);
  CHECK(c2.t_max == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(c2.lambda_max == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(c2.n_mean_corr == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(c2.holds);
}

TEST_CASE("dominance_check: holds on random all-positive factor panels") {
  StableRng rng(31);
  for (int rep = 0; rep < 40; ++rep) {
    OneFactorMarket market = OneFactorMarket::draw(10, rng);
    const SampleMoments m = sample_moments(market.simulate(90, rng));
    const DominanceCheck check = dominance_check(spectral_decompose(m), m);
    if (!check.assumption1_satisfied) continue;  // rare small-sample flip
    CHECK(check.holds);
  }
}

TEST_CASE("weak_factor_bounds: closed forms") {
  const WeakFactorBounds ones =
      weak_factor_bounds(moments_from_correlation(equicorrelation(3, 1.0)));
  CHECK(ones.bound_rows == doctest::Approx(0.0).epsilon(1e-12));

  const WeakFactorBounds ec =
      weak_factor_bounds(moments_from_correlation(equicorrelation(4, 0.5)));
  CHECK(ec.b == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ec.bound_b == doctest::Approx(4.0 - 6.25 / 1.75).epsilon(1e-10));

  const WeakFactorBounds id = weak_factor_bounds(
      moments_from_correlation(Eigen::MatrixXd::Identity(5, 5)));
  CHECK(id.b == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(id.bound_b == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("property: both sums equal n on random positive correlations") {
  StableRng rng(101);
  for (int rep = 0; rep < 60; ++rep) {
    const int n = 3 + static_cast<int>(rng.next_index(18));
    const Eigen::MatrixXd r = random_positive_correlation(n, rng);
    const SpectralModel model =
        spectral_decompose(moments_from_correlation(r));
    const DeviationProfile profile = deviation_profile(model);
    CHECK(std::abs(model.eigenvalues.sum() - n) < 1e-8);
    CHECK(std::abs(profile.total - n) < 1e-8);
    CHECK((profile.degrees.array() >= -1e-12).all());
    CHECK((profile.degrees.array() <= n + 1e-8).all());
  }
}

TEST_CASE("property: zero-eigenvalue eigenvectors respect the row bound") {
  StableRng rng(211);
  for (int rep = 0; rep < 12; ++rep) {
    const int n = 12;
    const int L = 6;
    const Eigen::MatrixXd r =
        rank_deficient_positive_correlation(n, L, rng);
    const SampleMoments m = moments_from_correlation(r);
    const SpectralModel model = spectral_decompose(m);
    const WeakFactorBounds bounds = weak_factor_bounds(m);
    int zero_count = 0;
    for (int i = 0; i < n; ++i) {
      if (model.eigenvalues(i) < 1e-10) {
        ++zero_count;
        const double t = deviation_degree(model.eigenvectors.col(i));
        CHECK(t <= bounds.bound_rows + 1e-8);
      }
    }
    CHECK(zero_count >= n - L);
  }
}

TEST_CASE("property: reconstruction and determinism") {
  StableRng rng(307);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 3 + static_cast<int>(rng.next_index(12));
    const Eigen::MatrixXd r = random_positive_correlation(n, rng);
    const SampleMoments m = moments_from_correlation(r);
    const SpectralModel a = spectral_decompose(m);
    const SpectralModel b = spectral_decompose(m);
    CHECK((a.eigenvectors * a.eigenvalues.asDiagonal() *
               a.eigenvectors.transpose() -
           r)
              .cwiseAbs()
              .maxCoeff() < 1e-8);
    CHECK((a.eigenvectors - b.eigenvectors).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff() == 0.0);
  }
}
