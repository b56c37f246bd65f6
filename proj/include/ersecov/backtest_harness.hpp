#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ersecov/erse_estimator.hpp"
#include "ersecov/portfolio.hpp"
#include "ersecov/returns_panel.hpp"

namespace ersecov {

// One strategy column of the comparison: an estimator kind plus its
// parameters. Recognized-but-unimplemented kinds (LIN2P, LIND, LINM, GIS,
// LIS, QIS) are carried through as explicit N/A rows so comparison tables
// keep their layout.
struct StrategySpec {
  std::string label;  // unique display label, e.g. "ERSE" or "ERSE:delta=0.1"
  std::string kind;   // SAMPLE | EW | LIN1P | LINC | ERSE | <recognized>
  ErseConfig erse{};  // used when kind == "ERSE"
};

struct StrategyMetrics {
  double oos_variance = std::numeric_limits<double>::quiet_NaN();
  double sharpe = std::numeric_limits<double>::quiet_NaN();
  double cond_mean = std::numeric_limits<double>::quiet_NaN();
  double cond_std = std::numeric_limits<double>::quiet_NaN();
  bool valid = false;  // complete out-of-sample column with >= 2 returns
};

// Per-strategy outcome of a rolling run. A strategy that fails at some
// window aborts only its own column; the diagnostic records the date. The
// three histories stay aligned (condition_history is empty for EW, which
// estimates nothing).
struct StrategyColumn {
  std::vector<double> oos_returns;
  std::vector<WeightVector> weight_history;
  std::vector<double> condition_history;
  bool implemented = true;
  bool failed = false;
  std::string diagnostic;
  StrategyMetrics metrics;
};

struct BacktestConfig {
  int window_L = 120;
  std::vector<StrategySpec> strategies;
  int start_index = -1;  // 1-based period of the first realized return;
                         // -1 means window_L + 1
  std::uint64_t rng_seed = 0;
};

struct BacktestResult {
  std::vector<std::string> oos_dates;
  std::vector<std::string> strategy_order;
  std::map<std::string, StrategyColumn> columns;
};

struct MetricsTable {
  std::vector<std::string> strategy_order;
  std::map<std::string, StrategyMetrics> rows;
};

// The rolling-window protocol: at each step fit every strategy on the
// trailing window_L rows strictly before the realization row, form GMV
// weights (EW bypasses estimation), realize w' r_t, advance one month.
// With the default start the run produces exactly T - L returns per
// surviving strategy.
BacktestResult rolling_backtest(const ReturnsPanel& panel,
                                const BacktestConfig& config);

MetricsTable metrics_table(const BacktestResult& result);

// Sample variance (length - 1 denominator); length >= 2 required.
double oos_variance(std::span<const double> returns);

// mean(excess) / sample std(excess) with excess = returns - risk_free and
// risk_free defaulting to zero. A zero-variance excess series errors,
// except the identically-zero one, whose ratio is 0.
double sharpe_ratio(std::span<const double> returns,
                    std::span<const double> risk_free = {});

// Metrics recomputed over the two halves of the out-of-sample period; the
// first half takes the extra month when the length is odd.
std::array<MetricsTable, 2> subperiod_metrics(const BacktestResult& result);

struct SubsampleSummaryRow {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double std_dev = std::numeric_limits<double>::quiet_NaN();
  double max = std::numeric_limits<double>::quiet_NaN();
  double min = std::numeric_limits<double>::quiet_NaN();
  // Reference strategy: share of draws where its variance is strictly
  // lowest. Other strategies: share of draws the reference beats them.
  double win_rate = std::numeric_limits<double>::quiet_NaN();
  // Mean over draws of (strategy variance - reference variance); NaN for
  // the reference itself.
  double mean_difference = std::numeric_limits<double>::quiet_NaN();
};

struct SubsampleResult {
  std::string reference_label;
  std::vector<std::string> strategy_order;
  std::vector<std::vector<int>> draw_assets;  // column indices per draw
  std::vector<MetricsTable> per_draw;
  std::map<std::string, SubsampleSummaryRow> summary;
  // Per non-reference strategy, the per-draw variance differences backing
  // mean_difference (for significance testing downstream).
  std::map<std::string, std::vector<double>> variance_differences;
};

// n_draws subsets of subset_size distinct assets, drawn uniformly without
// replacement from config.rng_seed (draw d uses stream d, so results do
// not depend on evaluation order); a full backtest per draw. The reference
// is the first ERSE strategy, else the first strategy.
SubsampleResult random_subsample_experiment(const ReturnsPanel& panel,
                                            int n_draws, int subset_size,
                                            const BacktestConfig& config);

struct WindowSweepEntry {
  int window = 0;
  MetricsTable metrics;
  std::string oos_first_date;
  std::string oos_last_date;
};

// One backtest per estimation window, all sharing the fixed start index in
// config so every entry covers the identical out-of-sample period. Every
// window must be smaller than the common start.
std::vector<WindowSweepEntry> window_sweep(const ReturnsPanel& panel,
                                           const std::vector<int>& windows,
                                           const BacktestConfig& config);

}  // namespace ersecov
