#include "ersecov/backtest_harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>

#include "ersecov/baseline_estimators.hpp"
#include "ersecov/rng.hpp"

namespace ersecov {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_recognized_unimplemented(const std::string& kind) {
  const auto& labels = recognized_unimplemented_labels();
  return std::find(labels.begin(), labels.end(), kind) != labels.end();
}

CovarianceEstimate fit_estimator(const StrategySpec& spec,
                                 const SampleMoments& moments,
                                 const Eigen::Ref<const Eigen::MatrixXd>& block) {
  if (spec.kind == "SAMPLE") return sample_estimate(moments);
  if (spec.kind == "LIN1P") return lin1p_estimate(block);
  if (spec.kind == "LINC") return linc_estimate(block);
  if (spec.kind == "ERSE") {
    CovarianceEstimate est = erse(moments, spec.erse);
    est.label = spec.label;
    return est;
  }
  throw std::invalid_argument("unknown estimator kind: " + spec.kind);
}

double mean_of(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

double sample_std(std::span<const double> xs) {
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

StrategyMetrics compute_metrics(std::span<const double> returns,
                                std::span<const double> conditions,
                                bool complete) {
  StrategyMetrics m;
  if (!complete || returns.size() < 2) return m;
  m.oos_variance = oos_variance(returns);
  try {
    m.sharpe = sharpe_ratio(returns);
  } catch (const std::exception&) {
    m.sharpe = kNaN;
  }
  if (conditions.size() >= 1) {
    m.cond_mean = mean_of(conditions);
    m.cond_std = conditions.size() >= 2 ? sample_std(conditions) : kNaN;
  }
  m.valid = true;
  return m;
}

}  // namespace

BacktestResult rolling_backtest(const ReturnsPanel& panel,
                                const BacktestConfig& config) {
  validate(panel);
  const int T = static_cast<int>(panel.n_periods());
  const int L = config.window_L;
  if (L < 2 || L >= T)
    throw std::invalid_argument("rolling_backtest: need 2 <= window_L < T");
  const int start = config.start_index < 0 ? L + 1 : config.start_index;
  if (start <= L)
    throw std::invalid_argument(
        "rolling_backtest: start_index must exceed window_L");
  if (start > T)
    throw std::invalid_argument("rolling_backtest: start_index beyond panel");
  if (config.strategies.empty())
    throw std::invalid_argument("rolling_backtest: no strategies requested");

  std::set<std::string> labels;
  for (const auto& s : config.strategies)
    if (!labels.insert(s.label).second)
      throw std::invalid_argument("rolling_backtest: duplicate strategy "
                                  "label " + s.label);

  BacktestResult result;
  for (const auto& s : config.strategies) {
    result.strategy_order.push_back(s.label);
    StrategyColumn col;
    col.implemented = !is_recognized_unimplemented(s.kind);
    result.columns.emplace(s.label, std::move(col));
  }

  const int n_windows = T - start + 1;
  result.oos_dates.reserve(static_cast<std::size_t>(n_windows));

  for (int t1 = start; t1 <= T; ++t1) {
    const int row = t1 - 1;  // realization row, 0-based
    const auto block = panel.returns.middleRows(row - L, L);
    const auto realized = panel.returns.row(row);
    const std::string& date = panel.dates[static_cast<std::size_t>(row)];
    result.oos_dates.push_back(date);

    std::optional<SampleMoments> moments;
    std::string moments_error;

    for (const auto& spec : config.strategies) {
      StrategyColumn& col = result.columns.at(spec.label);
      if (!col.implemented || col.failed) continue;

      if (spec.kind == "EW") {
        WeightVector w = ew_weights(static_cast<int>(panel.n_assets()));
        w.strategy_label = spec.label;
        col.oos_returns.push_back(realized.dot(w.weights));
        col.weight_history.push_back(std::move(w));
        continue;
      }

      try {
        if (!moments && moments_error.empty()) {
          try {
            moments = sample_moments(block, &panel.assets);
          } catch (const std::exception& e) {
            moments_error = e.what();
          }
        }
        if (!moments) throw std::runtime_error(moments_error);

        CovarianceEstimate est = fit_estimator(spec, *moments, block);
        WeightVector w = gmv_weights(est);
        w.strategy_label = spec.label;
        col.oos_returns.push_back(realized.dot(w.weights));
        col.condition_history.push_back(est.condition_number);
        col.weight_history.push_back(std::move(w));
      } catch (const std::exception& e) {
        col.failed = true;
        col.diagnostic = date + ": " + e.what();
      }
    }
  }

  for (auto& [label, col] : result.columns) {
    const bool complete =
        col.implemented && !col.failed &&
        col.oos_returns.size() == static_cast<std::size_t>(n_windows);
    col.metrics = compute_metrics(col.oos_returns, col.condition_history,
                                  complete);
  }
  return result;
}

MetricsTable metrics_table(const BacktestResult& result) {
  MetricsTable table;
  table.strategy_order = result.strategy_order;
  for (const auto& label : result.strategy_order)
    table.rows[label] = result.columns.at(label).metrics;
  return table;
}

double oos_variance(std::span<const double> returns) {
  if (returns.size() < 2)
    throw std::invalid_argument("oos_variance: need at least 2 returns");
  const double s = sample_std(returns);
  return s * s;
}

double sharpe_ratio(std::span<const double> returns,
                    std::span<const double> risk_free) {
  if (returns.size() < 2)
    throw std::invalid_argument("sharpe_ratio: need at least 2 returns");
  if (!risk_free.empty() && risk_free.size() != returns.size())
    throw std::invalid_argument("sharpe_ratio: risk-free series length "
                                "mismatch");
  std::vector<double> excess(returns.begin(), returns.end());
  if (!risk_free.empty())
    for (std::size_t i = 0; i < excess.size(); ++i) excess[i] -= risk_free[i];
  const double m = mean_of(excess);
  const double s = sample_std(excess);
  if (s == 0.0) {
    if (m == 0.0) return 0.0;  // excess identically zero
    throw std::invalid_argument("sharpe_ratio: zero standard deviation");
  }
  return m / s;
}

std::array<MetricsTable, 2> subperiod_metrics(const BacktestResult& result) {
  const std::size_t len = result.oos_dates.size();
  if (len < 4)
    throw std::invalid_argument("subperiod_metrics: need at least 4 "
                                "out-of-sample returns");
  const std::size_t len1 = (len + 1) / 2;  // first half takes the extra month

  std::array<MetricsTable, 2> halves;
  for (auto& h : halves) h.strategy_order = result.strategy_order;

  for (const auto& label : result.strategy_order) {
    const StrategyColumn& col = result.columns.at(label);
    for (int h = 0; h < 2; ++h) {
      StrategyMetrics m;
      if (col.metrics.valid) {
        const std::size_t begin = h == 0 ? 0 : len1;
        const std::size_t count = h == 0 ? len1 : len - len1;
        std::span<const double> rets(col.oos_returns.data() + begin, count);
        std::span<const double> conds;
        if (col.condition_history.size() == len)
          conds = std::span<const double>(
              col.condition_history.data() + begin, count);
        m = compute_metrics(rets, conds, true);
      }
      halves[static_cast<std::size_t>(h)].rows[label] = m;
    }
  }
  return halves;
}

SubsampleResult random_subsample_experiment(const ReturnsPanel& panel,
                                            int n_draws, int subset_size,
                                            const BacktestConfig& config) {
  validate(panel);
  const int n = static_cast<int>(panel.n_assets());
  if (subset_size > n)
    throw std::invalid_argument("random_subsample_experiment: subset_size "
                                "exceeds asset count");
  if (subset_size < 2)
    throw std::invalid_argument("random_subsample_experiment: subset_size "
                                "must be >= 2");
  if (n_draws < 1)
    throw std::invalid_argument("random_subsample_experiment: n_draws must "
                                "be >= 1");

  SubsampleResult out;
  for (const auto& s : config.strategies)
    out.strategy_order.push_back(s.label);
  out.reference_label = config.strategies.front().label;
  for (const auto& s : config.strategies) {
    if (s.kind == "ERSE") {
      out.reference_label = s.label;
      break;
    }
  }

  for (int d = 0; d < n_draws; ++d) {
    StableRng rng = StableRng::for_stream(config.rng_seed, static_cast<
                                          std::uint64_t>(d));
    std::vector<int> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    for (int k = 0; k < subset_size; ++k) {
      const auto j = k + static_cast<int>(rng.next_index(
                             static_cast<std::uint64_t>(n - k)));
      std::swap(pool[static_cast<std::size_t>(k)],
                pool[static_cast<std::size_t>(j)]);
    }
    std::vector<int> chosen(pool.begin(), pool.begin() + subset_size);
    std::sort(chosen.begin(), chosen.end());  // keep panel column order

    ReturnsPanel sub;
    sub.name = panel.name + "/draw" + std::to_string(d + 1);
    sub.dates = panel.dates;
    sub.returns.resize(panel.n_periods(), subset_size);
    for (int k = 0; k < subset_size; ++k) {
      sub.assets.push_back(panel.assets[static_cast<std::size_t>(chosen[
          static_cast<std::size_t>(k)])]);
      sub.returns.col(k) = panel.returns.col(chosen[static_cast<std::size_t>(
          k)]);
    }
    sub.provenance = "subsample of " + panel.name;

    BacktestResult bt = rolling_backtest(sub, config);
    out.draw_assets.push_back(std::move(chosen));
    out.per_draw.push_back(metrics_table(bt));
  }

  // Summary statistics over draws.
  for (const auto& label : out.strategy_order) {
    std::vector<double> vars;
    for (const auto& table : out.per_draw) {
      const auto& m = table.rows.at(label);
      if (m.valid) vars.push_back(m.oos_variance);
    }
    SubsampleSummaryRow row;
    if (!vars.empty()) {
      row.mean = mean_of(vars);
      row.std_dev = vars.size() >= 2 ? sample_std(vars) : kNaN;
      row.max = *std::max_element(vars.begin(), vars.end());
      row.min = *std::min_element(vars.begin(), vars.end());
    }
    out.summary[label] = row;
  }

  const std::string& ref = out.reference_label;
  int ref_strict_wins = 0;
  std::map<std::string, int> beats;
  std::map<std::string, int> paired;
  for (const auto& table : out.per_draw) {
    const auto& mref = table.rows.at(ref);
    if (!mref.valid) continue;
    bool strictly_lowest = true;
    for (const auto& label : out.strategy_order) {
      if (label == ref) continue;
      const auto& m = table.rows.at(label);
      if (!m.valid) continue;
      ++paired[label];
      out.variance_differences[label].push_back(m.oos_variance -
                                                mref.oos_variance);
      if (mref.oos_variance < m.oos_variance)
        ++beats[label];
      else
        strictly_lowest = false;
    }
    if (strictly_lowest) ++ref_strict_wins;
  }
  for (const auto& label : out.strategy_order) {
    auto& row = out.summary[label];
    if (label == ref) {
      row.win_rate = static_cast<double>(ref_strict_wins) /
                     static_cast<double>(n_draws);
      continue;
    }
    if (paired[label] > 0) {
      row.win_rate = static_cast<double>(beats[label]) /
                     static_cast<double>(paired[label]);
      row.mean_difference = mean_of(out.variance_differences[label]);
    }
  }
  return out;
}

std::vector<WindowSweepEntry> window_sweep(const ReturnsPanel& panel,
                                           const std::vector<int>& windows,
                                           const BacktestConfig& config) {
  if (config.start_index < 0)
    throw std::invalid_argument("window_sweep: a fixed common start index "
                                "is required");
  for (int w : windows)
    if (w >= config.start_index)
      throw std::invalid_argument(
          "window_sweep: window " + std::to_string(w) +
          " is not below the common start index " +
          std::to_string(config.start_index));

  std::vector<WindowSweepEntry> entries;
  for (int w : windows) {
    BacktestConfig cfg = config;
    cfg.window_L = w;
    BacktestResult bt = rolling_backtest(panel, cfg);
    WindowSweepEntry entry;
    entry.window = w;
    entry.metrics = metrics_table(bt);
    entry.oos_first_date = bt.oos_dates.front();
    entry.oos_last_date = bt.oos_dates.back();
    entries.push_back(std::move(entry));
  }
  return entries;
}

}  // namespace ersecov
