#pragma once

#include <optional>
#include <string>
#include <vector>

namespace gridssa {

/// Column-named table rendered three ways: aligned text for the console,
/// CSV and JSON for files. Cells are preformatted strings so all renderings
/// agree byte-for-byte on the numbers.
struct Table {
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> cells) {
    rows.push_back(std::move(cells));
  }
};

std::string to_csv(const Table& t);
std::string to_json(const Table& t);
std::string render_text(const Table& t);

/// Shortest-round-trip style formatting used across all reports.
std::string fmt_g17(double v);
/// Fixed-precision formatting for human-facing summaries.
std::string fmt_fixed(double v, int digits);
std::string fmt_opt(const std::optional<double>& v, int digits);

}  // namespace gridssa
