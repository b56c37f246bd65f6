#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ersecov {

struct BootstrapConfig {
  int n_samples_B = 1000;
  double mean_block_b = 5.0;  // mean block length of the stationary scheme
  std::uint64_t rng_seed = 0;
};

struct TestReport {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Politis-Romano stationary-bootstrap index sequence: start uniform in
// [0, T); at each step continue the block (index + 1 mod T) with
// probability 1 - 1/b, else restart uniform. Replicate r draws from stream
// r of the seed, so replicates are independent and order-insensitive.
std::vector<int> stationary_bootstrap_indices(int length_T,
                                              const BootstrapConfig& config,
                                              std::uint64_t replicate = 0);

// Two-sided test of equal variance between paired equal-length series (at
// least 10 observations). The statistic is log(var_a / var_b); both series
// are resampled with the same index vector in every replicate, preserving
// their cross-dependence, and the p-value comes from the centered bootstrap
// distribution: p = (1 + #{|stat*_r - stat| >= |stat|}) / (B + 1).
TestReport variance_equality_test(std::span<const double> series_a,
                                  std::span<const double> series_b,
                                  const BootstrapConfig& config);

// Same mechanics with statistic sharpe(a) - sharpe(b).
TestReport sharpe_difference_test(std::span<const double> series_a,
                                  std::span<const double> series_b,
                                  const BootstrapConfig& config);

// "***" below 0.01, "**" below 0.05, "*" below 0.1, else empty.
std::string significance_stars(double p_value);

}  // namespace ersecov
