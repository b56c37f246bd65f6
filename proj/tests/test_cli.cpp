#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ersecov/cli_commands.hpp"
#include "ersecov/data_ingest.hpp"
#include "support/synthetic.hpp"

using namespace ersecov;
using testsupport::OneFactorMarket;

namespace fs = std::filesystem;

namespace {

struct Workspace {
  fs::path root;
  Workspace() {
    root = fs::temp_directory_path() /
           ("ersecov_cli_" + std::to_string(::getpid()));
    fs::create_directories(root);
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(root, ec);
  }
  fs::path dir(const std::string& name) const {
    const fs::path p = root / name;
    fs::create_directories(p);
    return p;
  }
};

fs::path write_panel(const fs::path& dir, const std::string& name, int n,
                     int T, std::uint64_t seed) {
  StableRng rng(seed);
  OneFactorMarket market = OneFactorMarket::draw(n, rng);
  const ReturnsPanel panel = market.simulate(T, rng, name);
  const fs::path p = dir / (name + ".csv");
  write_returns_csv(panel, p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  return lines;
}

// Parses a named column out of a simple CSV (no quoting).
std::vector<std::string> csv_column(const std::string& text,
                                    const std::string& column) {
  const auto rows = lines_of(text);
  REQUIRE(!rows.empty());
  std::vector<std::string> header;
  {
    std::stringstream ss(rows[0]);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::size_t target = header.size();
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == column) target = i;
  REQUIRE(target < header.size());
  std::vector<std::string> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    std::stringstream ss(rows[r]);
    std::string cell;
    for (std::size_t i = 0; i <= target; ++i) std::getline(ss, cell, ',');
    out.push_back(cell);
  }
  return out;
}

Eigen::MatrixXd parse_matrix_csv(const fs::path& p) {
  const auto rows = lines_of(slurp(p));
  const std::size_t n = rows.size() - 1;
  Eigen::MatrixXd m(n, n);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    std::stringstream ss(rows[r]);
    std::string cell;
    std::getline(ss, cell, ',');  // row label
    for (std::size_t c = 0; c < n; ++c) {
      std::getline(ss, cell, ',');
      m(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c)) =
          std::stod(cell);
    }
  }
  return m;
}

}  // namespace

TEST_CASE("parse_estimator_request: labels, parameters, errors") {
  const EstimatorRequest plain = parse_estimator_request("erse");
  CHECK(plain.kind == "ERSE");
  CHECK(plain.delta == 0.25);

  const EstimatorRequest tuned = parse_estimator_request("ERSE:delta=0.1");
  CHECK(tuned.kind == "ERSE");
  CHECK(tuned.delta == doctest::Approx(0.1));
  CHECK(tuned.label == "ERSE:delta=0.1");

  CHECK(parse_estimator_request("sample").kind == "SAMPLE");
  CHECK(parse_estimator_request("LIN2P").kind == "LIN2P");

  CHECK_THROWS_WITH_AS(parse_estimator_request("FOO"),
                       doctest::Contains("LINC"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_estimator_request("FOO"),
                       doctest::Contains("QIS"), std::invalid_argument);
  CHECK_THROWS_AS(parse_estimator_request("SAMPLE:delta=0.1"),
                  std::invalid_argument);
}

TEST_CASE("cmd_report_corr: outputs, summary values, usage errors") {
  Workspace ws;
  // Two identical nonconstant columns correlate at exactly one.
  ReturnsPanel pair;
  pair.name = "pair";
  for (int t = 0; t < 8; ++t) {
    pair.dates.push_back(testsupport::month_label(t));
    pair.returns.conservativeResize(t + 1, 2);
    pair.returns(t, 0) = 0.5 * t + ((t % 3) ? 1.25 : -0.75);
    pair.returns(t, 1) = pair.returns(t, 0);
  }
  pair.assets = {"L", "R"};
  pair.provenance = "fixture";
  const fs::path panel_path = ws.root / "pair.csv";
  write_returns_csv(pair, panel_path);

  ExperimentSpec spec;
  spec.command = "report-corr";
  spec.inputs = {panel_path};
  spec.window = 4;
  spec.out_dir = ws.dir("report");
  CHECK(cmd_report_corr(spec) == 0);
  CHECK(fs::exists(spec.out_dir / "rolling_corr_pair.csv"));
  CHECK(fs::exists(spec.out_dir / "summary_corr.csv"));
  CHECK(fs::exists(spec.out_dir / "manifest.json"));

  const std::string summary = slurp(spec.out_dir / "summary_corr.csv");
  const auto rows = lines_of(summary);
  bool found_mean = false;
  for (const auto& row : rows)
    if (row.rfind("average_correlation,", 0) == 0) {
      found_mean = true;
      CHECK(std::stod(row.substr(row.find(',') + 1)) ==
            doctest::Approx(1.0).epsilon(1e-12));
    }
  CHECK(found_mean);

  ExperimentSpec empty = spec;
  empty.inputs.clear();
  CHECK(cmd_report_corr(empty) != 0);
}

TEST_CASE("cmd_report_corr: all-positive factor panel keeps min_corr > 0") {
  Workspace ws;
  const fs::path input = write_panel(ws.root, "factor", 12, 160, 29);
  ExperimentSpec spec;
  spec.command = "report-corr";
  spec.inputs = {input};
  spec.window = 120;
  spec.out_dir = ws.dir("report_factor");
  CHECK(cmd_report_corr(spec) == 0);

  for (const auto& row : lines_of(slurp(spec.out_dir / "summary_corr.csv")))
    if (row.rfind("min_correlation,", 0) == 0)
      CHECK(std::stod(row.substr(row.find(',') + 1)) > 0.0);
  const auto mins = csv_column(
      slurp(spec.out_dir / "rolling_corr_factor.csv"), "min_corr");
  REQUIRE(!mins.empty());
  for (const auto& cell : mins) CHECK(std::stod(cell) > 0.0);
}

TEST_CASE("cmd_estimate: delta zero reproduces the sample matrix") {
  Workspace ws;
  const fs::path input = write_panel(ws.root, "panel", 8, 60, 7);

  ExperimentSpec spec;
  spec.command = "estimate";
  spec.inputs = {input};
  spec.window = 0;  // entire panel
  spec.trace = true;
  spec.out_dir = ws.dir("estimate");
  spec.estimators = {parse_estimator_request("SAMPLE"),
                     parse_estimator_request("ERSE:delta=0"),
                     parse_estimator_request("ERSE")};
  CHECK(cmd_estimate(spec) == 0);

  const Eigen::MatrixXd sample =
      parse_matrix_csv(spec.out_dir / "cov_SAMPLE.csv");
  const Eigen::MatrixXd erse0 =
      parse_matrix_csv(spec.out_dir / "cov_ERSE_delta_0.csv");
  CHECK((sample - erse0).cwiseAbs().maxCoeff() < 1e-10);

  CHECK(fs::exists(spec.out_dir / "cov_ERSE.csv"));
  CHECK(fs::exists(spec.out_dir / "eigenvalues_ERSE.csv"));
  CHECK(fs::exists(spec.out_dir / "deviation_ERSE.csv"));
  CHECK(fs::exists(spec.out_dir / "deviation_SAMPLE.csv"));
  CHECK(fs::exists(spec.out_dir / "trace_ERSE.jsonl"));
  CHECK(fs::exists(spec.out_dir / "condition_numbers.csv"));

  // The default-delta request records 0.25 in the manifest.
  const std::string manifest = slurp(spec.out_dir / "manifest.json");
  CHECK(manifest.find("\"delta\": 0.25") != std::string::npos);

  // The command-level --delta reaches plain ERSE requests: delta 0
  // reproduces the sample matrix.
  ExperimentSpec flag = spec;
  flag.out_dir = ws.dir("estimate_flag");
  flag.delta = 0.0;
  flag.estimators = {parse_estimator_request("SAMPLE"),
                     parse_estimator_request("ERSE")};
  CHECK(cmd_estimate(flag) == 0);
  const Eigen::MatrixXd s2 = parse_matrix_csv(flag.out_dir / "cov_SAMPLE.csv");
  const Eigen::MatrixXd e2 = parse_matrix_csv(flag.out_dir / "cov_ERSE.csv");
  CHECK((s2 - e2).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(slurp(flag.out_dir / "manifest.json").find("\"delta\": 0.0") !=
        std::string::npos);
}

TEST_CASE("cmd_estimate: trace lines are valid JSON with step invariants") {
  Workspace ws;
  const fs::path input = write_panel(ws.root, "panel", 10, 80, 31);
  ExperimentSpec spec;
  spec.command = "estimate";
  spec.inputs = {input};
  spec.window = 0;
  spec.trace = true;
  spec.out_dir = ws.dir("trace");
  spec.estimators = {parse_estimator_request("ERSE")};
  REQUIRE(cmd_estimate(spec) == 0);

  const auto lines = lines_of(slurp(spec.out_dir / "trace_ERSE.jsonl"));
  REQUIRE(!lines.empty());
  int expected_step = 1;
  for (const auto& line : lines) {
    const auto row = nlohmann::json::parse(line);
    CHECK(row.at("step").get<int>() == expected_step++);
    CHECK(row.at("index_low").get<int>() >= 0);
    CHECK(row.at("index_high").get<int>() >= 0);
    const double gamma = row.at("gamma").get<double>();
    CHECK(gamma >= 0.0);
    CHECK(gamma <= 1.0);
    const auto before = row.at("lambda_before").get<std::vector<double>>();
    const auto after = row.at("lambda_after").get<std::vector<double>>();
    REQUIRE(before.size() == 2);
    REQUIRE(after.size() == 2);
    CHECK(after[0] == doctest::Approx(gamma * before[0] +
                                      (1.0 - gamma) * before[1])
                          .epsilon(1e-10));
    CHECK(after[0] + after[1] ==
          doctest::Approx(before[0] + before[1]).epsilon(1e-10));
    const auto t_after = row.at("t_after").get<std::vector<double>>();
    CHECK(t_after[0] == doctest::Approx(0.25).epsilon(1e-10));
  }

  // Matrix dump header carries the asset names in both dimensions.
  const auto cov_rows = lines_of(slurp(spec.out_dir / "cov_ERSE.csv"));
  CHECK(cov_rows[0].rfind(",A1,A2,", 0) == 0);
  CHECK(cov_rows[1].rfind("A1,", 0) == 0);
}

TEST_CASE("cmd_estimate: per-label failures keep the exit status honest") {
  Workspace ws;
  const fs::path input = write_panel(ws.root, "panel", 6, 40, 11);
  ExperimentSpec spec;
  spec.command = "estimate";
  spec.inputs = {input};
  spec.window = 0;
  spec.out_dir = ws.dir("estimate_bad");
  spec.estimators = {parse_estimator_request("SAMPLE"),
                     parse_estimator_request("QIS")};
  CHECK(cmd_estimate(spec) != 0);
  CHECK(fs::exists(spec.out_dir / "cov_SAMPLE.csv"));  // good label written
}

TEST_CASE("cmd_backtest: outputs, NA rows, byte-identical reruns") {
  Workspace ws;
  const fs::path input = write_panel(ws.root, "panel", 10, 60, 13);

  ExperimentSpec spec;
  spec.command = "backtest";
  spec.inputs = {input};
  spec.window = 24;
  spec.seed = 99;
  spec.bootstrap_B = 200;
  spec.out_dir = ws.dir("bt1");
  spec.estimators = {parse_estimator_request("EW"),
                     parse_estimator_request("SAMPLE"),
                     parse_estimator_request("LIN1P"),
                     parse_estimator_request("LINC"),
                     parse_estimator_request("LIN2P"),
                     parse_estimator_request("ERSE")};
  CHECK(cmd_backtest(spec) == 0);
  for (const char* name :
       {"metrics.csv", "oos_returns.csv", "condition_history.csv",
        "weight_history.csv", "subperiod_metrics.csv", "bootstrap_tests.csv",
        "manifest.json"})
    CHECK(fs::exists(spec.out_dir / name));

  const std::string metrics = slurp(spec.out_dir / "metrics.csv");
  bool na_row = false;
  for (const auto& row : lines_of(metrics))
    if (row.rfind("LIN2P,NA,NA", 0) == 0) na_row = true;
  CHECK(na_row);

  const std::string tests = slurp(spec.out_dir / "bootstrap_tests.csv");
  CHECK(tests.find("variance,ERSE vs SAMPLE") != std::string::npos);
  CHECK(tests.find("sharpe,ERSE vs EW") != std::string::npos);

  ExperimentSpec rerun = spec;
  rerun.out_dir = ws.dir("bt2");
  CHECK(cmd_backtest(rerun) == 0);
  for (const char* name :
       {"metrics.csv", "oos_returns.csv", "condition_history.csv",
        "weight_history.csv", "subperiod_metrics.csv", "bootstrap_tests.csv",
        "manifest.json"})
    CHECK(slurp(spec.out_dir / name) == slurp(rerun.out_dir / name));
}

TEST_CASE("cmd_sweep: default delta grid and window sweep") {
  Workspace ws;
  const fs::path input = write_panel(ws.root, "panel", 8, 80, 17);

  ExperimentSpec spec;
  spec.command = "sweep";
  spec.inputs = {input};
  spec.window = 24;
  spec.out_dir = ws.dir("sweep");
  CHECK(cmd_sweep(spec) == 0);
  const std::string sweep = slurp(spec.out_dir / "delta_sweep.csv");
  int erse_rows = 0;
  for (const auto& row : lines_of(sweep))
    if (row.find(",ERSE,") != std::string::npos) ++erse_rows;
  CHECK(erse_rows == 20);
  const std::string manifest = slurp(spec.out_dir / "manifest.json");
  CHECK(manifest.find("recommended_delta_band") != std::string::npos);

  ExperimentSpec wspec = spec;
  wspec.out_dir = ws.dir("wsweep");
  wspec.windows = {12, 24};
  wspec.start = 31;
  wspec.deltas = {0.25};
  CHECK(cmd_sweep(wspec) == 0);
  CHECK(fs::exists(wspec.out_dir / "window_sweep.csv"));
  const auto windows_col =
      csv_column(slurp(wspec.out_dir / "window_sweep.csv"), "window");
  CHECK(!windows_col.empty());
}

TEST_CASE("cmd_subsample: degenerate draw matches backtest metrics") {
  Workspace ws;
  const fs::path input = write_panel(ws.root, "panel", 8, 50, 19);

  ExperimentSpec spec;
  spec.command = "subsample";
  spec.inputs = {input};
  spec.window = 20;
  spec.draws = 1;
  spec.subset = 8;
  spec.seed = 5;
  spec.bootstrap_B = 100;
  spec.out_dir = ws.dir("sub");
  CHECK(cmd_subsample(spec) == 0);

  ExperimentSpec bt = spec;
  bt.command = "backtest";
  bt.out_dir = ws.dir("sub_bt");
  CHECK(cmd_backtest(bt) == 0);

  const auto sub_means =
      csv_column(slurp(spec.out_dir / "subsample_summary.csv"), "mean");
  const auto bt_vars =
      csv_column(slurp(bt.out_dir / "metrics.csv"), "oos_variance");
  REQUIRE(sub_means.size() == bt_vars.size());
  for (std::size_t i = 0; i < sub_means.size(); ++i)
    CHECK(sub_means[i] == bt_vars[i]);

  ExperimentSpec rerun = spec;
  rerun.out_dir = ws.dir("sub2");
  CHECK(cmd_subsample(rerun) == 0);
  CHECK(slurp(spec.out_dir / "subsample_summary.csv") ==
        slurp(rerun.out_dir / "subsample_summary.csv"));
}

TEST_CASE("ERSECOV_OUT environment override") {
  Workspace ws;
  const fs::path input = write_panel(ws.root, "panel", 4, 20, 23);
  const fs::path env_dir = ws.root / "env_out";
  ::setenv("ERSECOV_OUT", env_dir.c_str(), 1);

  ExperimentSpec spec;
  spec.command = "report-corr";
  spec.inputs = {input};
  spec.window = 8;  // out_dir left empty on purpose
  CHECK(cmd_report_corr(spec) == 0);
  CHECK(fs::exists(env_dir / "manifest.json"));
  ::unsetenv("ERSECOV_OUT");
}

TEST_CASE("digest and atomic write plumbing") {
  Workspace ws;
  const fs::path f = ws.root / "blob.txt";
  write_file_atomic(f, "hello");
  CHECK(slurp(f) == "hello");
  const std::string d1 = fnv1a64_file_digest(f);
  write_file_atomic(f, "hello");
  CHECK(fnv1a64_file_digest(f) == d1);
  write_file_atomic(f, "hellp");
  CHECK(fnv1a64_file_digest(f) != d1);
  CHECK(format_cell(std::numeric_limits<double>::quiet_NaN()) == "NA");
}
