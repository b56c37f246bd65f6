#include "ersecov/cli_commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ersecov/backtest_harness.hpp"
#include "ersecov/baseline_estimators.hpp"
#include "ersecov/data_ingest.hpp"
#include "ersecov/inference.hpp"
#include "ersecov/rng.hpp"
#include "ersecov/spectral_core.hpp"

namespace ersecov {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return s;
}

std::string sanitize(const std::string& label) {
  std::string out;
  for (char c : label)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' ||
            c == '-')
               ? c
               : '_';
  return out;
}

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

fs::path resolve_out_dir(const ExperimentSpec& spec) {
  if (!spec.out_dir.empty()) return spec.out_dir;
  if (const char* env = std::getenv("ERSECOV_OUT")) return fs::path(env);
  return fs::path("ersecov_out");
}

ReturnsPanel load_combined(const ExperimentSpec& spec) {
  if (spec.inputs.empty())
    throw std::invalid_argument("no --input files given");
  std::vector<ReturnsPanel> panels;
  for (const auto& p : spec.inputs) panels.push_back(load_returns_csv(p));
  if (panels.size() == 1) return std::move(panels.front());
  return synthesize_panel(panels);
}

std::vector<EstimatorRequest> default_strategy_set() {
  std::vector<EstimatorRequest> set;
  for (const char* label : {"EW", "SAMPLE", "LIN1P", "LINC", "ERSE"})
    set.push_back(EstimatorRequest{label, label, 0.25, false});
  return set;
}

// The command-level --delta applies to every ERSE request that did not pin
// its own threshold inline.
std::vector<EstimatorRequest> apply_default_delta(
    std::vector<EstimatorRequest> requests, double delta) {
  for (auto& r : requests)
    if (r.kind == "ERSE" && !r.delta_explicit) r.delta = delta;
  return requests;
}

std::vector<StrategySpec> to_strategies(
    const std::vector<EstimatorRequest>& requests) {
  std::vector<StrategySpec> specs;
  for (const auto& r : requests) {
    StrategySpec s;
    s.label = r.label;
    s.kind = r.kind;
    s.erse.delta = r.delta;
    specs.push_back(std::move(s));
  }
  return specs;
}

json estimators_json(const std::vector<EstimatorRequest>& requests) {
  json arr = json::array();
  for (const auto& r : requests) {
    json e{{"label", r.label}, {"kind", r.kind}};
    if (r.kind == "ERSE") e["delta"] = r.delta;
    arr.push_back(e);
  }
  return arr;
}

// Run bookkeeping: every command funnels its outputs through here so the
// manifest is complete and written last.
class RunWriter {
 public:
  RunWriter(const ExperimentSpec& spec, json parameters)
      : dir_(resolve_out_dir(spec)), spec_(spec),
        parameters_(std::move(parameters)) {
    fs::create_directories(dir_);
  }

  const fs::path& dir() const { return dir_; }

  void write(const std::string& filename, const std::string& content) {
    write_file_atomic(dir_ / filename, content);
    outputs_.push_back(filename);
  }

  void add_metadata(const std::string& key, json value) {
    metadata_[key] = std::move(value);
  }

  void finish() {
    json manifest;
    manifest["command"] = spec_.command;
    manifest["parameters"] = parameters_;
    manifest["seed"] = spec_.seed;
    json inputs = json::array();
    for (const auto& p : spec_.inputs)
      inputs.push_back(json{{"path", p.string()},
                            {"digest", fnv1a64_file_digest(p)}});
    manifest["inputs"] = inputs;
    manifest["outputs"] = outputs_;
    if (!metadata_.empty()) manifest["metadata"] = metadata_;
    write_file_atomic(dir_ / "manifest.json", manifest.dump(2) + "\n");
  }

 private:
  fs::path dir_;
  const ExperimentSpec& spec_;
  json parameters_;
  std::vector<std::string> outputs_;
  json metadata_ = json::object();
};

std::string matrix_csv(const Eigen::MatrixXd& m,
                       const std::vector<std::string>& names) {
  std::string out;
  for (const auto& a : names) out += "," + a;
  out += "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out += names[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out += "," + fmt_num(m(i, j));
    out += "\n";
  }
  return out;
}

std::string metrics_csv(const MetricsTable& table,
                        const std::map<std::string, std::string>& notes) {
  std::string out = "strategy,oos_variance,sharpe,cond_mean,cond_std,note\n";
  for (const auto& label : table.strategy_order) {
    const auto& m = table.rows.at(label);
    std::string note;
    if (auto it = notes.find(label); it != notes.end()) note = it->second;
    out += label + "," + format_cell(m.oos_variance) + "," +
           format_cell(m.sharpe) + "," + format_cell(m.cond_mean) + "," +
           format_cell(m.cond_std) + "," + note + "\n";
  }
  return out;
}

// Two-sided iid-bootstrap test of mean zero for the subsample differences.
double mean_zero_p_value(const std::vector<double>& diffs, int B,
                         std::uint64_t seed) {
  if (diffs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double stat =
      std::accumulate(diffs.begin(), diffs.end(), 0.0) /
      static_cast<double>(diffs.size());
  BootstrapConfig cfg;
  cfg.n_samples_B = B;
  cfg.mean_block_b = 1.0;  // draws are independent
  cfg.rng_seed = seed;
  int extreme = 0;
  for (int r = 0; r < B; ++r) {
    const auto idx = stationary_bootstrap_indices(
        static_cast<int>(diffs.size()), cfg, static_cast<std::uint64_t>(r));
    double m = 0.0;
    for (int i : idx) m += diffs[static_cast<std::size_t>(i)];
    m /= static_cast<double>(diffs.size());
    if (std::abs(m - stat) >= std::abs(stat)) ++extreme;
  }
  return (1.0 + extreme) / (1.0 + B);
}

int run_command(const char* name, const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << name << ": error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

EstimatorRequest parse_estimator_request(const std::string& text) {
  const auto colon = text.find(':');
  const std::string label_part =
      upper(colon == std::string::npos ? text : text.substr(0, colon));

  const auto& implemented = implemented_estimator_labels();
  const auto& recognized = recognized_unimplemented_labels();
  const bool is_impl = std::find(implemented.begin(), implemented.end(),
                                 label_part) != implemented.end();
  const bool is_recog = std::find(recognized.begin(), recognized.end(),
                                  label_part) != recognized.end();
  if (!is_impl && !is_recog) {
    std::string msg = "unknown estimator label '" + text + "'; implemented: ";
    for (std::size_t i = 0; i < implemented.size(); ++i)
      msg += (i ? ", " : "") + implemented[i];
    msg += "; recognized but not implemented (reported as NA): ";
    for (std::size_t i = 0; i < recognized.size(); ++i)
      msg += (i ? ", " : "") + recognized[i];
    throw std::invalid_argument(msg);
  }

  EstimatorRequest req;
  req.kind = label_part;
  req.label = label_part;
  if (colon != std::string::npos) {
    std::stringstream params(text.substr(colon + 1));
    std::string kv;
    while (std::getline(params, kv, ',')) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("estimator parameter '" + kv +
                                    "' is not key=value");
      const std::string key = kv.substr(0, eq);
      const std::string value = kv.substr(eq + 1);
      if (key == "delta" && label_part == "ERSE") {
        req.delta = std::stod(value);
        req.delta_explicit = true;
        req.label = "ERSE:delta=" + value;
      } else {
        throw std::invalid_argument("unknown parameter '" + key +
                                    "' for estimator " + label_part);
      }
    }
  }
  return req;
}

std::string fnv1a64_file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001B3ULL;
    }
  }
  char out[20];
  std::snprintf(out, sizeof(out), "%016llx",
                static_cast<unsigned long long>(hash));
  return out;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string format_cell(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt_num(v);
}

int cmd_report_corr(const ExperimentSpec& spec) {
  return run_command("report-corr", [&] {
    if (spec.inputs.empty())
      throw std::invalid_argument("no --input files given");
    std::vector<ReturnsPanel> panels;
    for (const auto& p : spec.inputs) panels.push_back(load_returns_csv(p));

    RunWriter run(spec, json{{"window", spec.window}});

    // Rolling report per panel.
    for (const auto& panel : panels) {
      std::string csv = "date,mean_corr,min_corr\n";
      for (const auto& rec : rolling_correlation_report(panel, spec.window))
        csv += rec.date + "," + format_cell(rec.mean_corr) + "," +
               format_cell(rec.min_corr) + "\n";
      run.write("rolling_corr_" + sanitize(panel.name) + ".csv", csv);
    }

    // Full-sample summary, one column per panel.
    std::string summary = "metric";
    for (const auto& panel : panels) summary += "," + panel.name;
    summary += "\n";
    std::vector<std::vector<std::string>> rows(7);
    const char* row_names[] = {"n_assets",        "n_months",
                               "average_mean",    "average_variance",
                               "max_correlation", "average_correlation",
                               "min_correlation"};
    for (const auto& panel : panels) {
      const SampleMoments m = sample_moments(panel);
      const Eigen::Index n = panel.n_assets();
      double mx = -1.0, mn = 1.0, sum = 0.0;
      long cnt = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
          const double c = m.correlation(i, j);
          mx = std::max(mx, c);
          mn = std::min(mn, c);
          sum += c;
          ++cnt;
        }
      }
      rows[0].push_back(std::to_string(n));
      rows[1].push_back(std::to_string(panel.n_periods()));
      rows[2].push_back(format_cell(m.mean.mean()));
      rows[3].push_back(format_cell(m.covariance.diagonal().mean()));
      rows[4].push_back(format_cell(mx));
      rows[5].push_back(format_cell(sum / static_cast<double>(cnt)));
      rows[6].push_back(format_cell(mn));
    }
    for (int r = 0; r < 7; ++r) {
      summary += row_names[r];
      for (const auto& cell : rows[static_cast<std::size_t>(r)])
        summary += "," + cell;
      summary += "\n";
    }
    run.write("summary_corr.csv", summary);
    run.finish();
  });
}

int cmd_estimate(const ExperimentSpec& spec) {
  int label_failures = 0;
  const int rc = run_command("estimate", [&] {
    const ReturnsPanel panel = load_combined(spec);
    const int T = static_cast<int>(panel.n_periods());
    const int w = spec.window <= 0 ? T : spec.window;
    if (w > T)
      throw std::invalid_argument("window " + std::to_string(w) +
                                  " exceeds panel length " +
                                  std::to_string(T));
    const auto block = panel.returns.bottomRows(w);

    auto requests = spec.estimators;
    if (requests.empty()) {
      for (const char* label : {"SAMPLE", "LIN1P", "LINC", "ERSE"})
        requests.push_back(EstimatorRequest{label, label, 0.25, false});
    }
    requests = apply_default_delta(requests, spec.delta);

    RunWriter run(spec, json{{"window", w},
                             {"delta", spec.delta},
                             {"trace", spec.trace},
                             {"estimators", estimators_json(requests)}});

    const SampleMoments moments = sample_moments(block, &panel.assets);
    const SpectralModel model = spectral_decompose(moments);
    const DeviationProfile sample_profile = deviation_profile(model);

    // The sample deviation profile accompanies every run.
    {
      std::string dev = "index,deviation_degree\n";
      for (Eigen::Index i = 0; i < sample_profile.degrees.size(); ++i)
        dev += std::to_string(i + 1) + "," +
               fmt_num(sample_profile.degrees(i)) + "\n";
      run.write("deviation_SAMPLE.csv", dev);
    }

    std::string conds = "estimator,condition_number\n";
    for (const auto& req : requests) {
      try {
        std::optional<CovarianceEstimate> est;
        if (req.kind == "SAMPLE") est = sample_estimate(moments);
        else if (req.kind == "LIN1P") est = lin1p_estimate(block);
        else if (req.kind == "LINC") est = linc_estimate(block);
        else if (req.kind == "ERSE") {
          ErseConfig cfg;
          cfg.delta = req.delta;
          est = erse(moments, cfg);
          est->label = req.label;
        } else if (req.kind == "EW") {
          throw std::invalid_argument(
              "EW is a weighting rule, not a covariance estimator");
        } else {
          throw std::invalid_argument("estimator " + req.kind +
                                      " is recognized but not implemented");
        }

        const std::string tag = sanitize(req.label);
        run.write("cov_" + tag + ".csv",
                  matrix_csv(est->covariance, panel.assets));
        std::string evals = "index,eigenvalue\n";
        for (Eigen::Index i = 0; i < est->eigenvalues_hat.size(); ++i)
          evals += std::to_string(i + 1) + "," +
                   fmt_num(est->eigenvalues_hat(i)) + "\n";
        run.write("eigenvalues_" + tag + ".csv", evals);
        conds += req.label + "," + format_cell(est->condition_number) + "\n";

        if (req.kind == "ERSE") {
          // Post-rotation deviation profile, reconstructed from the trace.
          Eigen::VectorXd degrees = sample_profile.degrees;
          for (const auto& step : est->rotation_trace) {
            degrees(step.index_low) = step.t_after[0];
            degrees(step.index_high) = step.t_after[1];
          }
          std::string dev = "index,deviation_degree\n";
          for (Eigen::Index i = 0; i < degrees.size(); ++i)
            dev += std::to_string(i + 1) + "," + fmt_num(degrees(i)) + "\n";
          run.write("deviation_" + tag + ".csv", dev);

          if (spec.trace) {
            std::string lines;
            int k = 0;
            for (const auto& s : est->rotation_trace) {
              json row{{"step", ++k},
                       {"index_low", s.index_low},
                       {"index_high", s.index_high},
                       {"s1", s.s1},
                       {"s2", s.s2},
                       {"theta", s.theta},
                       {"gamma", s.gamma},
                       {"t_before", s.t_before},
                       {"t_after", s.t_after},
                       {"lambda_before", s.lambda_before},
                       {"lambda_after", s.lambda_after}};
              lines += row.dump() + "\n";
            }
            run.write("trace_" + tag + ".jsonl", lines);
          }
        }
      } catch (const std::exception& e) {
        std::cerr << "estimate[" << req.label << "]: " << e.what() << "\n";
        ++label_failures;
      }
    }
    run.write("condition_numbers.csv", conds);
    run.finish();
  });
  return rc != 0 ? rc : (label_failures > 0 ? 1 : 0);
}

int cmd_backtest(const ExperimentSpec& spec) {
  return run_command("backtest", [&] {
    const ReturnsPanel panel = load_combined(spec);
    auto requests = apply_default_delta(
        spec.estimators.empty() ? default_strategy_set() : spec.estimators,
        spec.delta);

    BacktestConfig config;
    config.window_L = spec.window;
    config.start_index = spec.start;
    config.rng_seed = spec.seed;
    config.strategies = to_strategies(requests);

    RunWriter run(spec, json{{"window", spec.window},
                             {"delta", spec.delta},
                             {"start", spec.start},
                             {"B", spec.bootstrap_B},
                             {"block", spec.block_b},
                             {"estimators", estimators_json(requests)}});

    const BacktestResult result = rolling_backtest(panel, config);

    std::map<std::string, std::string> notes;
    for (const auto& label : result.strategy_order) {
      const auto& col = result.columns.at(label);
      if (!col.implemented) notes[label] = "not implemented";
      else if (col.failed) notes[label] = "failed at " + col.diagnostic;
    }
    run.write("metrics.csv", metrics_csv(metrics_table(result), notes));

    // Out-of-sample return series, one column per strategy.
    std::string oos = "date";
    for (const auto& label : result.strategy_order) oos += "," + label;
    oos += "\n";
    for (std::size_t t = 0; t < result.oos_dates.size(); ++t) {
      oos += result.oos_dates[t];
      for (const auto& label : result.strategy_order) {
        const auto& col = result.columns.at(label);
        oos += "," + (t < col.oos_returns.size()
                          ? fmt_num(col.oos_returns[t])
                          : std::string("NA"));
      }
      oos += "\n";
    }
    run.write("oos_returns.csv", oos);

    std::string cond = "date";
    for (const auto& label : result.strategy_order) cond += "," + label;
    cond += "\n";
    for (std::size_t t = 0; t < result.oos_dates.size(); ++t) {
      cond += result.oos_dates[t];
      for (const auto& label : result.strategy_order) {
        const auto& col = result.columns.at(label);
        cond += "," + (t < col.condition_history.size()
                           ? format_cell(col.condition_history[t])
                           : std::string("NA"));
      }
      cond += "\n";
    }
    run.write("condition_history.csv", cond);

    std::string weights = "date,asset,weight,strategy\n";
    for (const auto& label : result.strategy_order) {
      const auto& col = result.columns.at(label);
      for (std::size_t t = 0; t < col.weight_history.size(); ++t) {
        const auto& w = col.weight_history[t].weights;
        for (Eigen::Index j = 0; j < w.size(); ++j)
          weights += result.oos_dates[t] + "," +
                     panel.assets[static_cast<std::size_t>(j)] + "," +
                     fmt_num(w(j)) + "," + label + "\n";
      }
    }
    run.write("weight_history.csv", weights);

    // Subperiod breakdown (first half takes the extra month).
    if (result.oos_dates.size() >= 4) {
      const auto halves = subperiod_metrics(result);
      std::string sub =
          "subperiod,strategy,oos_variance,sharpe,cond_mean,cond_std\n";
      for (int h = 0; h < 2; ++h) {
        for (const auto& label : halves[h].strategy_order) {
          const auto& m = halves[h].rows.at(label);
          sub += std::to_string(h + 1) + "," + label + "," +
                 format_cell(m.oos_variance) + "," + format_cell(m.sharpe) +
                 "," + format_cell(m.cond_mean) + "," +
                 format_cell(m.cond_std) + "\n";
        }
      }
      run.write("subperiod_metrics.csv", sub);
    }

    // Bootstrap comparisons against the reference strategy.
    std::string ref = result.strategy_order.front();
    for (const auto& s : config.strategies)
      if (s.kind == "ERSE") {
        ref = s.label;
        break;
      }
    BootstrapConfig bcfg;
    bcfg.n_samples_B = spec.bootstrap_B;
    bcfg.mean_block_b = spec.block_b;
    bcfg.rng_seed = spec.seed;

    std::string tests = "test,strategy_pair,statistic,p_value,stars\n";
    const auto& ref_col = result.columns.at(ref);
    for (const auto& label : result.strategy_order) {
      if (label == ref) continue;
      const auto& col = result.columns.at(label);
      if (!ref_col.metrics.valid || !col.metrics.valid) continue;
      try {
        const TestReport var = variance_equality_test(ref_col.oos_returns,
                                                      col.oos_returns, bcfg);
        tests += "variance," + ref + " vs " + label + "," +
                 fmt_num(var.statistic) + "," + fmt_num(var.p_value) + "," +
                 significance_stars(var.p_value) + "\n";
        const TestReport sr = sharpe_difference_test(ref_col.oos_returns,
                                                     col.oos_returns, bcfg);
        tests += "sharpe," + ref + " vs " + label + "," +
                 fmt_num(sr.statistic) + "," + fmt_num(sr.p_value) + "," +
                 significance_stars(sr.p_value) + "\n";
      } catch (const std::exception& e) {
        tests += "error," + ref + " vs " + label + ",NA,NA,\n";
        std::cerr << "backtest: bootstrap test " << ref << " vs " << label
                  << ": " << e.what() << "\n";
      }
    }
    run.write("bootstrap_tests.csv", tests);
    run.add_metadata("reference_strategy", ref);
    run.finish();
  });
}

int cmd_sweep(const ExperimentSpec& spec) {
  return run_command("sweep", [&] {
    const ReturnsPanel panel = load_combined(spec);
    const bool do_windows = !spec.windows.empty();
    std::vector<double> deltas = spec.deltas;
    const bool do_deltas = !deltas.empty() || !do_windows;
    if (do_deltas && deltas.empty())
      for (int k = 1; k <= 20; ++k) deltas.push_back(0.05 * k);

    auto base_requests = apply_default_delta(
        spec.estimators.empty() ? default_strategy_set() : spec.estimators,
        spec.delta);

    RunWriter run(spec, json{{"window", spec.window},
                             {"start", spec.start},
                             {"deltas", deltas},
                             {"windows", spec.windows},
                             {"estimators", estimators_json(base_requests)}});

    if (do_deltas) {
      // One backtest carrying an ERSE column per grid point; the other
      // strategies are delta-invariant and appear once.
      BacktestConfig config;
      config.window_L = spec.window;
      config.start_index = spec.start;
      config.rng_seed = spec.seed;
      std::vector<std::string> fixed_labels;
      for (const auto& r : base_requests) {
        if (r.kind == "ERSE") continue;
        config.strategies.push_back(
            StrategySpec{r.label, r.kind, ErseConfig{}});
        fixed_labels.push_back(r.label);
      }
      std::vector<std::string> erse_labels;
      for (double d : deltas) {
        StrategySpec s;
        s.label = "ERSE:delta=" + fmt_num(d);
        s.kind = "ERSE";
        s.erse.delta = d;
        erse_labels.push_back(s.label);
        config.strategies.push_back(std::move(s));
      }
      const BacktestResult result = rolling_backtest(panel, config);
      std::string csv = "delta,strategy,oos_variance,sharpe\n";
      for (std::size_t k = 0; k < deltas.size(); ++k) {
        const auto& erse_m = result.columns.at(erse_labels[k]).metrics;
        csv += fmt_num(deltas[k]) + ",ERSE," +
               format_cell(erse_m.oos_variance) + "," +
               format_cell(erse_m.sharpe) + "\n";
        for (const auto& label : fixed_labels) {
          const auto& m = result.columns.at(label).metrics;
          csv += fmt_num(deltas[k]) + "," + label + "," +
                 format_cell(m.oos_variance) + "," + format_cell(m.sharpe) +
                 "\n";
        }
      }
      run.write("delta_sweep.csv", csv);
      run.add_metadata("recommended_delta_band", json::array({0.15, 0.35}));
    }

    if (do_windows) {
      BacktestConfig config;
      config.start_index = spec.start < 0 ? 241 : spec.start;
      config.rng_seed = spec.seed;
      config.strategies = to_strategies(base_requests);
      const auto entries = window_sweep(panel, spec.windows, config);
      std::string csv = "window,strategy,oos_variance,sharpe\n";
      for (const auto& entry : entries) {
        for (const auto& label : entry.metrics.strategy_order) {
          const auto& m = entry.metrics.rows.at(label);
          csv += std::to_string(entry.window) + "," + label + "," +
                 format_cell(m.oos_variance) + "," + format_cell(m.sharpe) +
                 "\n";
        }
      }
      run.write("window_sweep.csv", csv);
      run.add_metadata("window_sweep_start",
                       spec.start < 0 ? 241 : spec.start);
      if (!entries.empty())
        run.add_metadata("window_sweep_oos_range",
                         json::array({entries.front().oos_first_date,
                                      entries.front().oos_last_date}));
    }
    run.finish();
  });
}

int cmd_subsample(const ExperimentSpec& spec) {
  return run_command("subsample", [&] {
    const ReturnsPanel panel = load_combined(spec);
    auto requests = apply_default_delta(
        spec.estimators.empty() ? default_strategy_set() : spec.estimators,
        spec.delta);

    BacktestConfig config;
    config.window_L = spec.window;
    config.start_index = spec.start;
    config.rng_seed = spec.seed;
    config.strategies = to_strategies(requests);

    RunWriter run(spec, json{{"window", spec.window},
                             {"delta", spec.delta},
                             {"start", spec.start},
                             {"draws", spec.draws},
                             {"subset", spec.subset},
                             {"B", spec.bootstrap_B},
                             {"estimators", estimators_json(requests)}});

    const SubsampleResult result = random_subsample_experiment(
        panel, spec.draws, spec.subset, config);

    std::string draws = "draw,strategy,oos_variance,sharpe\n";
    for (std::size_t d = 0; d < result.per_draw.size(); ++d) {
      for (const auto& label : result.strategy_order) {
        const auto& m = result.per_draw[d].rows.at(label);
        draws += std::to_string(d + 1) + "," + label + "," +
                 format_cell(m.oos_variance) + "," + format_cell(m.sharpe) +
                 "\n";
      }
    }
    run.write("subsample_draws.csv", draws);

    std::string summary =
        "strategy,mean,std,max,min,win_rate,mean_difference,md_p_value,"
        "md_stars\n";
    for (const auto& label : result.strategy_order) {
      const auto& row = result.summary.at(label);
      double p = std::numeric_limits<double>::quiet_NaN();
      std::string stars;
      if (label != result.reference_label) {
        auto it = result.variance_differences.find(label);
        if (it != result.variance_differences.end()) {
          p = mean_zero_p_value(it->second, spec.bootstrap_B, spec.seed);
          if (!std::isnan(p)) stars = significance_stars(p);
        }
      }
      summary += label + "," + format_cell(row.mean) + "," +
                 format_cell(row.std_dev) + "," + format_cell(row.max) + "," +
                 format_cell(row.min) + "," + format_cell(row.win_rate) +
                 "," + format_cell(row.mean_difference) + "," +
                 format_cell(p) + "," + stars + "\n";
    }
    run.write("subsample_summary.csv", summary);
    run.add_metadata("reference_strategy", result.reference_label);
    run.finish();
  });
}

}  // namespace ersecov
