#pragma once

// CSV tables (the canonical output) and static SVG plots rendered from them.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "opmi/core.hpp"
#include "opmi/runner.hpp"

namespace opmi {

// Column layout shared by every curve-producing command.
inline const std::vector<std::string> kCurveColumns = {
    "series", "grid", "gamma", "mean_adv", "stderr_adv", "theory_adv", "gen_error"};
inline const std::vector<std::string> kVarianceColumns = {
    "repeat", "grid", "gamma", "arm", "mean", "empirical_var", "theory_var"};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a column, or throws std::out_of_range.
  std::size_t column(const std::string& name) const;
  // Numeric cell; empty cells read as NaN.
  double number(std::size_t row, const std::string& name) const;
  const std::string& text(std::size_t row, const std::string& name) const;
};

// Shortest decimal that reads back to the same double; NaN -> empty cell.
std::string format_number(double v);
std::string format_number(std::optional<double> v);

void write_csv(std::ostream& out, const CsvTable& table);
CsvTable read_csv(std::istream& in);
void write_csv_file(const std::string& path, const CsvTable& table);
CsvTable read_csv_file(const std::string& path);

// One row per grid point, `series` in the first column.
void append_curve(CsvTable& table, const std::string& series, const CurveResult& curve,
                  const ExperimentConfig& config);
CsvTable curve_table();
CsvTable variance_table(const std::vector<VarianceRow>& rows);

struct PlotSpec {
  std::string title;
  std::string x_column;
  std::string y_column;
  std::string x_label;
  std::string y_label;
  std::string series_column = "series";
  std::string error_column;    // optional, drawn as +/- bars
  std::string overlay_column;  // optional, drawn dashed
  bool log_x = false;
};

// Pure rendering of table content; never recomputes anything.
std::string render_svg(const CsvTable& table, const PlotSpec& spec);

}  // namespace opmi
