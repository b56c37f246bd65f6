#include "ersecov/data_ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ersecov {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& token, double& out) {
  const std::string t = trim(token);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size();
}

bool is_yyyymm(const std::string& token) {
  if (token.size() != 6) return false;
  return std::all_of(token.begin(), token.end(),
                     [](unsigned char c) { return std::isdigit(c); });
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void validate(const ReturnsPanel& panel) {
  const auto T = panel.n_periods();
  const auto n = panel.n_assets();
  if (n < 2) throw std::invalid_argument("panel has fewer than 2 assets");
  if (T < 2) throw std::invalid_argument("panel has fewer than 2 periods");
  if (static_cast<Eigen::Index>(panel.dates.size()) != T)
    throw std::invalid_argument("date count does not match row count");
  if (static_cast<Eigen::Index>(panel.assets.size()) != n)
    throw std::invalid_argument("asset count does not match column count");
  for (std::size_t i = 1; i < panel.dates.size(); ++i) {
    if (!(panel.dates[i - 1] < panel.dates[i]))
      throw std::invalid_argument("dates not strictly increasing at row " +
                                  std::to_string(i + 1));
  }
  std::set<std::string> seen;
  for (const auto& a : panel.assets) {
    if (!seen.insert(a).second)
      throw std::invalid_argument("duplicate asset identifier: " + a);
  }
  if (!panel.returns.allFinite())
    throw std::invalid_argument("panel contains non-finite returns");
}

ReturnsPanel load_returns_csv(const std::filesystem::path& path,
                              const MissingPolicy& policy) {
  if (policy.max_missing_per_asset < 0)
    throw std::invalid_argument("max_missing_per_asset must be >= 0");
  if (!std::isfinite(policy.fill_value))
    throw std::invalid_argument("fill_value must be finite");

  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());

  std::string line;
  std::vector<std::string> raw_assets;
  std::vector<std::string> dates;
  std::vector<std::vector<double>> rows;      // values with markers intact
  std::vector<std::vector<bool>> row_missing; // marker positions

  int line_no = 0;
  bool header_read = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    auto cells = split_csv_line(line);
    if (!header_read) {
      // First cell labels the date column and is ignored.
      for (std::size_t c = 1; c < cells.size(); ++c) {
        const std::string name = trim(cells[c]);
        if (name.empty())
          throw std::invalid_argument("empty asset name in header, column " +
                                      std::to_string(c + 1));
        raw_assets.push_back(name);
      }
      if (raw_assets.empty())
        throw std::invalid_argument("header has no asset columns");
      header_read = true;
      continue;
    }
    const std::string date = trim(cells.at(0));
    if (!is_yyyymm(date))
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": first column is not YYYYMM: '" + date +
                                  "'");
    if (cells.size() != raw_assets.size() + 1)
      throw std::invalid_argument(
          "line " + std::to_string(line_no) + ": expected " +
          std::to_string(raw_assets.size() + 1) + " cells, got " +
          std::to_string(cells.size()));
    std::vector<double> vals(raw_assets.size());
    std::vector<bool> miss(raw_assets.size(), false);
    for (std::size_t c = 0; c < raw_assets.size(); ++c) {
      double v;
      if (!parse_double(cells[c + 1], v))
        throw std::invalid_argument(
            "line " + std::to_string(line_no) + ", column " +
            std::to_string(c + 2) + " (asset '" + raw_assets[c] +
            "'): cannot parse numeric cell '" + trim(cells[c + 1]) + "'");
      for (double marker : policy.missing_markers) {
        if (v == marker) {
          miss[c] = true;
          break;
        }
      }
      vals[c] = v;
    }
    dates.push_back(date);
    rows.push_back(std::move(vals));
    row_missing.push_back(std::move(miss));
  }
  if (!header_read) throw std::invalid_argument("file has no header row");
  if (rows.size() < 2)
    throw std::invalid_argument("file has fewer than 2 data rows");

  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (!(dates[i - 1] < dates[i]))
      throw std::invalid_argument("non-monotone dates at data row " +
                                  std::to_string(i + 1) + " ('" + dates[i] +
                                  "' after '" + dates[i - 1] + "')");
  }

  // Per-asset missing counts decide survival; ties at the threshold stay.
  std::vector<int> missing_count(raw_assets.size(), 0);
  for (const auto& miss : row_missing)
    for (std::size_t c = 0; c < miss.size(); ++c)
      if (miss[c]) ++missing_count[c];

  std::vector<std::size_t> kept;
  std::vector<std::string> dropped;
  for (std::size_t c = 0; c < raw_assets.size(); ++c) {
    if (missing_count[c] > policy.max_missing_per_asset)
      dropped.push_back(raw_assets[c]);
    else
      kept.push_back(c);
  }
  if (kept.size() < 2)
    throw std::invalid_argument("fewer than 2 assets survive the missing-data "
                                "policy in " + path.string());

  ReturnsPanel panel;
  panel.name = path.stem().string();
  panel.dates = std::move(dates);
  for (auto c : kept) panel.assets.push_back(raw_assets[c]);
  panel.returns.resize(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(kept.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t k = 0; k < kept.size(); ++k) {
      const std::size_t c = kept[k];
      panel.returns(static_cast<Eigen::Index>(r),
                    static_cast<Eigen::Index>(k)) =
          row_missing[r][c] ? policy.fill_value : rows[r][c];
    }
  }

  std::string prov = "loaded from " + path.string() + "; dropped assets: ";
  if (dropped.empty()) {
    prov += "none";
  } else {
    for (std::size_t i = 0; i < dropped.size(); ++i)
      prov += (i ? ", " : "") + dropped[i];
  }
  panel.provenance = prov;
  validate(panel);
  return panel;
}

void write_returns_csv(const ReturnsPanel& panel,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << "date";
  for (const auto& a : panel.assets) out << ',' << a;
  out << '\n';
  for (Eigen::Index r = 0; r < panel.n_periods(); ++r) {
    out << panel.dates[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < panel.n_assets(); ++c)
      out << ',' << format_double(panel.returns(r, c));
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

ReturnsPanel synthesize_panel(const std::vector<ReturnsPanel>& panels) {
  if (panels.empty())
    throw std::invalid_argument("synthesize_panel: no input panels");

  const auto& dates = panels.front().dates;
  for (std::size_t p = 1; p < panels.size(); ++p) {
    const auto& d = panels[p].dates;
    const std::size_t upto = std::min(dates.size(), d.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (d[i] != dates[i])
        throw std::invalid_argument(
            "date mismatch between panel 1 and panel " + std::to_string(p + 1) +
            " at position " + std::to_string(i + 1) + ": '" + dates[i] +
            "' vs '" + d[i] + "'");
    }
    if (d.size() != dates.size())
      throw std::invalid_argument(
          "date count mismatch between panel 1 and panel " +
          std::to_string(p + 1) + " at position " +
          std::to_string(upto + 1));
  }

  // Unique prefixes guarantee unique combined identifiers.
  std::vector<std::string> prefixes;
  std::set<std::string> used;
  for (std::size_t p = 0; p < panels.size(); ++p) {
    std::string base =
        panels[p].name.empty() ? "p" + std::to_string(p + 1) : panels[p].name;
    std::string prefix = base;
    int k = 2;
    while (!used.insert(prefix).second) prefix = base + "#" + std::to_string(k++);
    prefixes.push_back(prefix);
  }

  ReturnsPanel out;
  out.dates = dates;
  Eigen::Index total = 0;
  for (const auto& p : panels) total += p.n_assets();
  out.returns.resize(static_cast<Eigen::Index>(dates.size()), total);
  std::string names;
  Eigen::Index col = 0;
  for (std::size_t p = 0; p < panels.size(); ++p) {
    for (const auto& a : panels[p].assets)
      out.assets.push_back(prefixes[p] + "." + a);
    out.returns.middleCols(col, panels[p].n_assets()) = panels[p].returns;
    col += panels[p].n_assets();
    names += (p ? "+" : "") + prefixes[p];
  }
  out.name = names;
  out.provenance = "synthesized from " + std::to_string(panels.size()) +
                   " panel(s): " + names;
  validate(out);
  return out;
}

std::vector<RollingCorrelationRecord> rolling_correlation_report(
    const ReturnsPanel& panel, int window) {
  validate(panel);
  const Eigen::Index T = panel.n_periods();
  const Eigen::Index n = panel.n_assets();
  if (window < 2 || window > T)
    throw std::invalid_argument("window out of range: " +
                                std::to_string(window) + " for T = " +
                                std::to_string(T));
  const double L = static_cast<double>(window);

  // Cross-product sums are maintained incrementally (one rank-1 update per
  // step); means and variances are recomputed two-pass per window so that a
  // constant column yields an exact zero variance.
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index r = 0; r < window; ++r)
    cross.selfadjointView<Eigen::Lower>().rankUpdate(
        panel.returns.row(r).transpose(), 1.0);

  std::vector<RollingCorrelationRecord> records;
  records.reserve(static_cast<std::size_t>(T - window));
  for (Eigen::Index t = window; t < T; ++t) {
    cross.selfadjointView<Eigen::Lower>().rankUpdate(
        panel.returns.row(t).transpose(), 1.0);
    cross.selfadjointView<Eigen::Lower>().rankUpdate(
        panel.returns.row(t - window).transpose(), -1.0);
    const auto block = panel.returns.middleRows(t - window + 1, window);
    const Eigen::VectorXd mean = block.colwise().mean();
    Eigen::VectorXd sd(n);
    for (Eigen::Index j = 0; j < n; ++j)
      sd(j) = std::sqrt((block.col(j).array() - mean(j)).square().sum() /
                        (L - 1.0));

    RollingCorrelationRecord rec;
    rec.date = panel.dates[static_cast<std::size_t>(t)];
    double sum = 0.0;
    double mn = std::numeric_limits<double>::infinity();
    long count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (sd(i) == 0.0 || sd(j) == 0.0) {
          ++rec.skipped_pairs;
          continue;
        }
        const double cov =
            (cross(j, i) - L * mean(i) * mean(j)) / (L - 1.0);
        double corr = cov / (sd(i) * sd(j));
        corr = std::clamp(corr, -1.0, 1.0);
        sum += corr;
        mn = std::min(mn, corr);
        ++count;
      }
    }
    if (count > 0) {
      rec.mean_corr = sum / static_cast<double>(count);
      rec.min_corr = mn;
    } else {
      rec.mean_corr = std::numeric_limits<double>::quiet_NaN();
      rec.min_corr = std::numeric_limits<double>::quiet_NaN();
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace ersecov
