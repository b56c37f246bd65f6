#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ersecov {

struct EstimatorRequest {
  std::string label;  // canonical display label, e.g. "ERSE:delta=0.1"
  std::string kind;   // SAMPLE | EW | LIN1P | LINC | ERSE | <recognized>
  double delta = 0.25;
  bool delta_explicit = false;  // set by a label:delta=... parameter; when
                                // false the command-level --delta applies
};

// Everything a command needs, parsed from flags. Referenced paths must
// exist at run time; the output directory is created if absent.
struct ExperimentSpec {
  std::string command;
  std::vector<std::filesystem::path> inputs;
  std::vector<EstimatorRequest> estimators;  // empty selects the default set
  int window = 120;
  double delta = 0.25;         // default threshold for ERSE estimators
  std::vector<double> deltas;  // sweep grid; empty = 0.05..1.00 step 0.05
  std::vector<int> windows;    // window-sweep grid
  int start = -1;              // 1-based first OOS period; -1 = window + 1
  int draws = 150;
  int subset = 200;
  std::uint64_t seed = 0;
  int bootstrap_B = 1000;
  double block_b = 5.0;
  bool trace = false;
  std::filesystem::path out_dir;  // empty: $ERSECOV_OUT, else ./ersecov_out
};

// Parses "label" or "label:key=value[,...]" (label case-insensitive; the
// only key is delta, valid for ERSE). Throws std::invalid_argument listing
// the implemented and the recognized-but-unimplemented labels on an unknown
// label.
EstimatorRequest parse_estimator_request(const std::string& text);

// Commands return the process exit status: 0 iff every requested output was
// written. Each run ends with a manifest.json recording all parameters, the
// seed and input digests, sufficient to reproduce the run exactly.
int cmd_report_corr(const ExperimentSpec& spec);
int cmd_estimate(const ExperimentSpec& spec);
int cmd_backtest(const ExperimentSpec& spec);
int cmd_sweep(const ExperimentSpec& spec);
int cmd_subsample(const ExperimentSpec& spec);

// Shared plumbing, exposed for the tests.
std::string fnv1a64_file_digest(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);
std::string format_cell(double v);  // %.17g; NaN renders as NA

}  // namespace ersecov
