#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ersecov/returns_panel.hpp"

namespace ersecov {

// Loads a Ken-French-style monthly CSV: header row of asset names, first
// column YYYYMM, comma-separated numeric body. Assets with more missing
// cells than policy.max_missing_per_asset are dropped; surviving missing
// cells are set to policy.fill_value. Column order is preserved and the
// provenance records the path plus the dropped-asset list.
//
// Throws std::runtime_error for unreadable files and std::invalid_argument
// for malformed content (bad numeric cell with row/column coordinates,
// non-monotone dates, fewer than 2 surviving assets).
ReturnsPanel load_returns_csv(const std::filesystem::path& path,
                              const MissingPolicy& policy = {});

// Writes a panel back in the same CSV layout (round-trip safe: values are
// emitted with enough digits that reloading reproduces them bit-for-bit).
void write_returns_csv(const ReturnsPanel& panel,
                       const std::filesystem::path& path);

// Column-wise concatenation of panels sharing an identical date sequence.
// Asset identifiers are prefixed with the source panel name so the combined
// id set is unique. Throws on the first date mismatch, reporting its
// position.
ReturnsPanel synthesize_panel(const std::vector<ReturnsPanel>& panels);

struct RollingCorrelationRecord {
  std::string date;
  double mean_corr = 0.0;  // mean pairwise correlation, diagonal excluded
  double min_corr = 0.0;
  int skipped_pairs = 0;   // pairs dropped because an asset had zero
                           // variance inside the window
};

// One record per period from the (window+1)-th to the T-th, each computed
// from the trailing `window` rows. Pairs involving a zero-variance asset
// are skipped and counted in the record.
std::vector<RollingCorrelationRecord> rolling_correlation_report(
    const ReturnsPanel& panel, int window);

}  // namespace ersecov
