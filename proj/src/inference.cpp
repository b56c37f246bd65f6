#include "ersecov/inference.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ersecov/backtest_harness.hpp"
#include "ersecov/rng.hpp"

namespace ersecov {

namespace {

double sample_variance(std::span<const double> xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size() - 1);
}

// Shared percentile machinery for both tests. `stat` evaluates the
// statistic on a (possibly resampled) pair; it may return a non-finite
// value on a degenerate replicate, which is counted as extreme.
template <typename StatFn>
TestReport bootstrap_two_sided(std::span<const double> a,
                               std::span<const double> b,
                               const BootstrapConfig& config, StatFn stat) {
  if (a.size() != b.size())
    throw std::invalid_argument("bootstrap test: series length mismatch");
  if (a.size() < 10)
    throw std::invalid_argument("bootstrap test: need at least 10 paired "
                                "observations");
  if (config.n_samples_B < 1)
    throw std::invalid_argument("bootstrap test: n_samples_B must be >= 1");
  if (config.mean_block_b < 1.0)
    throw std::invalid_argument("bootstrap test: mean_block_b must be >= 1");

  const int T = static_cast<int>(a.size());
  TestReport report;
  report.statistic = stat(a, b);
  if (!std::isfinite(report.statistic))
    throw std::invalid_argument("bootstrap test: statistic is not finite on "
                                "the input series");

  std::vector<double> ra(a.size()), rb(b.size());
  int extreme = 0;
  for (int r = 0; r < config.n_samples_B; ++r) {
    const std::vector<int> idx = stationary_bootstrap_indices(
        T, config, static_cast<std::uint64_t>(r));
    for (int i = 0; i < T; ++i) {
      ra[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(idx[
          static_cast<std::size_t>(i)])];
      rb[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(idx[
          static_cast<std::size_t>(i)])];
    }
    const double s = stat(ra, rb);
    const double centered = std::isfinite(s)
                                ? std::abs(s - report.statistic)
                                : std::numeric_limits<double>::infinity();
    if (centered >= std::abs(report.statistic)) ++extreme;
  }
  report.p_value = (1.0 + static_cast<double>(extreme)) /
                   (1.0 + static_cast<double>(config.n_samples_B));
  return report;
}

}  // namespace

std::vector<int> stationary_bootstrap_indices(int length_T,
                                              const BootstrapConfig& config,
                                              std::uint64_t replicate) {
  if (length_T < 1)
    throw std::invalid_argument("stationary_bootstrap_indices: length must "
                                "be >= 1");
  if (config.mean_block_b < 1.0)
    throw std::invalid_argument("stationary_bootstrap_indices: mean_block_b "
                                "must be >= 1");
  StableRng rng = StableRng::for_stream(config.rng_seed, replicate);
  const double restart_prob = 1.0 / config.mean_block_b;
  const auto n = static_cast<std::uint64_t>(length_T);

  std::vector<int> idx(static_cast<std::size_t>(length_T));
  int current = static_cast<int>(rng.next_index(n));
  idx[0] = current;
  for (int i = 1; i < length_T; ++i) {
    if (rng.next_double() < restart_prob)
      current = static_cast<int>(rng.next_index(n));
    else
      current = (current + 1) % length_T;
    idx[static_cast<std::size_t>(i)] = current;
  }
  return idx;
}

TestReport variance_equality_test(std::span<const double> series_a,
                                  std::span<const double> series_b,
                                  const BootstrapConfig& config) {
  const double va = sample_variance(series_a);
  const double vb = sample_variance(series_b);
  if (!(va > 0.0) || !(vb > 0.0))
    throw std::invalid_argument("variance_equality_test: a series has zero "
                                "variance");
  return bootstrap_two_sided(
      series_a, series_b, config,
      [](std::span<const double> x, std::span<const double> y) {
        return std::log(sample_variance(x) / sample_variance(y));
      });
}

TestReport sharpe_difference_test(std::span<const double> series_a,
                                  std::span<const double> series_b,
                                  const BootstrapConfig& config) {
  return bootstrap_two_sided(
      series_a, series_b, config,
      [](std::span<const double> x,
         std::span<const double> y) -> double {
        try {
          return sharpe_ratio(x) - sharpe_ratio(y);
        } catch (const std::exception&) {
          return std::numeric_limits<double>::quiet_NaN();
        }
      });
}

std::string significance_stars(double p_value) {
  if (p_value < 0.01) return "***";
  if (p_value < 0.05) return "**";
  if (p_value < 0.1) return "*";
  return "";
}

}  // namespace ersecov
