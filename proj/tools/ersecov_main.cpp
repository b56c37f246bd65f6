// ersecov — batch experiments for covariance estimation on positively
// correlated assets: rolling correlation reports, covariance estimates,
// GMV backtests, parameter sweeps and randomized subsampling.

#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "ersecov/cli_commands.hpp"

namespace {

struct CommonFlags {
  std::vector<std::string> inputs;
  std::vector<std::string> estimators;
  std::string out;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags, ersecov::ExperimentSpec&) {
  cmd->add_option("--input", flags.inputs, "Input CSV panel (repeatable)")
      ->required();
  cmd->add_option("--out", flags.out,
                  "Output directory (default: $ERSECOV_OUT or ./ersecov_out)");
  cmd->add_option("--seed", flags.seed, "Seed for all randomness");
}

ersecov::ExperimentSpec finish_spec(const std::string& command,
                                    const CommonFlags& flags,
                                    ersecov::ExperimentSpec spec) {
  spec.command = command;
  for (const auto& p : flags.inputs) spec.inputs.emplace_back(p);
  for (const auto& e : flags.estimators)
    spec.estimators.push_back(ersecov::parse_estimator_request(e));
  spec.out_dir = flags.out;
  spec.seed = flags.seed;
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ersecov: covariance estimation toolkit for positively "
               "correlated assets"};
  app.require_subcommand(1);

  ersecov::ExperimentSpec spec;
  CommonFlags flags;

  auto* report = app.add_subcommand(
      "report-corr", "Rolling correlation report and dataset summary");
  add_common(report, flags, spec);
  report->add_option("--window", spec.window, "Rolling window length")
      ->default_val(120);

  auto* estimate = app.add_subcommand(
      "estimate", "Fit estimators on the trailing window and dump matrices");
  add_common(estimate, flags, spec);
  estimate->add_option("--estimator", flags.estimators,
                       "Estimator label[:key=value,...] (repeatable)");
  estimate->add_option("--window", spec.window,
                       "Trailing window length (0 = entire panel)")
      ->default_val(0);
  estimate->add_option("--delta", spec.delta,
                       "Deviation threshold for ERSE estimators")
      ->default_val(0.25);
  estimate->add_flag("--trace", spec.trace,
                     "Emit the ERSE rotation trace as JSON lines");

  auto* backtest = app.add_subcommand(
      "backtest", "Rolling-window GMV backtest with bootstrap comparisons");
  add_common(backtest, flags, spec);
  backtest->add_option("--estimator", flags.estimators,
                       "Strategy label[:key=value,...] (repeatable)");
  backtest->add_option("--window", spec.window, "Estimation window L")
      ->default_val(120);
  backtest->add_option("--delta", spec.delta,
                       "Deviation threshold for ERSE strategies")
      ->default_val(0.25);
  backtest->add_option("--start", spec.start,
                       "1-based period of the first out-of-sample return "
                       "(default: window + 1)");
  backtest->add_option("--B", spec.bootstrap_B, "Bootstrap replicates")
      ->default_val(1000);
  backtest->add_option("--block", spec.block_b,
                       "Mean block length of the stationary bootstrap")
      ->default_val(5.0);

  auto* sweep = app.add_subcommand(
      "sweep", "Out-of-sample metrics across delta and/or window grids");
  add_common(sweep, flags, spec);
  sweep->add_option("--estimator", flags.estimators,
                    "Strategy label[:key=value,...] (repeatable)");
  sweep->add_option("--delta", spec.deltas,
                    "Delta grid point (repeatable; default 0.05..1.00 step "
                    "0.05)");
  sweep->add_option("--window", spec.window,
                    "Estimation window for the delta sweep")
      ->default_val(120);
  sweep->add_option("--windows", spec.windows,
                    "Window grid point for the window sweep (repeatable)");
  sweep->add_option("--start", spec.start,
                    "Common start period shared by all windows (default 241 "
                    "for the window sweep)");

  auto* subsample = app.add_subcommand(
      "subsample", "Randomized asset-subset robustness experiment");
  add_common(subsample, flags, spec);
  subsample->add_option("--estimator", flags.estimators,
                        "Strategy label[:key=value,...] (repeatable)");
  subsample->add_option("--window", spec.window, "Estimation window L")
      ->default_val(120);
  subsample->add_option("--delta", spec.delta,
                        "Deviation threshold for ERSE strategies")
      ->default_val(0.25);
  subsample->add_option("--start", spec.start,
                        "1-based period of the first out-of-sample return");
  subsample->add_option("--draws", spec.draws, "Number of random draws")
      ->default_val(150);
  subsample->add_option("--subset", spec.subset, "Assets per draw")
      ->default_val(200);
  subsample->add_option("--B", spec.bootstrap_B,
                        "Bootstrap replicates for the mean-difference test")
      ->default_val(1000);

  CLI11_PARSE(app, argc, argv);

  try {
    if (report->parsed())
      return ersecov::cmd_report_corr(finish_spec("report-corr", flags, spec));
    if (estimate->parsed())
      return ersecov::cmd_estimate(finish_spec("estimate", flags, spec));
    if (backtest->parsed())
      return ersecov::cmd_backtest(finish_spec("backtest", flags, spec));
    if (sweep->parsed())
      return ersecov::cmd_sweep(finish_spec("sweep", flags, spec));
    if (subsample->parsed())
      return ersecov::cmd_subsample(finish_spec("subsample", flags, spec));
  } catch (const std::exception& e) {
    std::cerr << "ersecov: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
