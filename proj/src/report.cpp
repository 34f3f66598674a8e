#include "opmi/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "opmi/theory.hpp"

namespace opmi {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

// Fixed-precision label text for axes.
std::string tick_label(double v) {
  std::ostringstream out;
  out << std::setprecision(4) << v;
  return out.str();
}

std::string px(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << v;
  return out.str();
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<double> nice_ticks(double lo, double hi, int target) {
  std::vector<double> ticks;
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) {
    ticks.push_back(std::fabs(t) < 1e-12 * step ? 0.0 : t);
  }
  return ticks;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::out_of_range("no CSV column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  const std::string& cell = rows.at(row).at(column(name));
  if (cell.empty()) return kNaN;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw std::invalid_argument("non-numeric CSV cell '" + cell + "'");
  }
  return v;
}

const std::string& CsvTable::text(std::size_t row, const std::string& name) const {
  return rows.at(row).at(column(name));
}

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string format_number(std::optional<double> v) { return v ? format_number(*v) : ""; }

void write_csv(std::ostream& out, const CsvTable& table) {
  auto write_row = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i].find_first_of(",\n") != std::string::npos) {
        throw std::invalid_argument("CSV cell contains a separator: '" + cells[i] + "'");
      }
      out << (i ? "," : "") << cells[i];
    }
    out << '\n';
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty CSV");
  table.header = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != table.header.size()) {
      throw std::invalid_argument("CSV row has " + std::to_string(cells.size()) +
                                  " cells, header has " + std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

void write_csv_file(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_csv(out, table);
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  return read_csv(in);
}

CsvTable curve_table() { return CsvTable{kCurveColumns, {}}; }

void append_curve(CsvTable& table, const std::string& series, const CurveResult& curve,
                  const ExperimentConfig& config) {
  for (std::size_t i = 0; i < curve.p_grid.size(); ++i) {
    const int p = curve.p_grid[i];
    double gen = kNaN;
    if (curve.model_kind == ModelKind::kGaussianLinear && curve.lambda == 0.0 &&
        p > config.n + 1) {
      gen = generalization_error(config.n, p, config.D, config.sigma) +
            config.noise_bar * config.noise_bar;
    }
    table.rows.push_back({series, std::to_string(p), format_number(curve.gamma[i]),
                          format_number(curve.empirical[i].mean),
                          format_number(curve.empirical[i].std_error),
                          curve.has_overlay() ? format_number(curve.theory_overlay[i]) : "",
                          format_number(gen)});
  }
}

CsvTable variance_table(const std::vector<VarianceRow>& rows) {
  CsvTable table{kVarianceColumns, {}};
  for (const auto& r : rows) {
    table.rows.push_back({std::to_string(r.repeat), std::to_string(r.p), format_number(r.gamma),
                          std::to_string(r.m), format_number(r.empirical_mean),
                          format_number(r.empirical_var), format_number(r.theory_var)});
  }
  return table;
}

std::string render_svg(const CsvTable& table, const PlotSpec& spec) {
  constexpr double kWidth = 640, kHeight = 420;
  constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 55;
  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

  struct Point {
    double x, y, err, overlay;
  };
  std::vector<std::string> order;
  std::map<std::string, std::vector<Point>> series;
  const bool has_err = !spec.error_column.empty();
  const bool has_overlay = !spec.overlay_column.empty();

  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string name =
        spec.series_column.empty() ? std::string() : table.text(r, spec.series_column);
    Point pt{table.number(r, spec.x_column), table.number(r, spec.y_column),
             has_err ? table.number(r, spec.error_column) : kNaN,
             has_overlay ? table.number(r, spec.overlay_column) : kNaN};
    if (!std::isfinite(pt.x) || (spec.log_x && pt.x <= 0.0)) continue;
    if (!series.count(name)) order.push_back(name);
    series[name].push_back(pt);
    const double x = spec.log_x ? std::log10(pt.x) : pt.x;
    x_lo = std::min(x_lo, x);
    x_hi = std::max(x_hi, x);
    for (double y : {pt.y, pt.overlay}) {
      if (!std::isfinite(y)) continue;
      const double e = std::isfinite(pt.err) && y == pt.y ? pt.err : 0.0;
      y_lo = std::min(y_lo, y - e);
      y_hi = std::max(y_hi, y + e);
    }
  }
  if (!std::isfinite(x_lo)) x_lo = 0.0, x_hi = 1.0;
  if (!std::isfinite(y_lo)) y_lo = 0.0, y_hi = 1.0;
  if (x_hi == x_lo) x_lo -= 0.5, x_hi += 0.5;
  if (y_hi == y_lo) y_lo -= 0.5, y_hi += 0.5;
  const double y_pad = 0.05 * (y_hi - y_lo);
  y_lo -= y_pad;
  y_hi += y_pad;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double x) {
    const double v = spec.log_x ? std::log10(x) : x;
    return kLeft + (v - x_lo) / (x_hi - x_lo) * plot_w;
  };
  auto sy = [&](double y) { return kTop + (y_hi - y) / (y_hi - y_lo) * plot_h; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << px(kLeft + plot_w / 2) << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-size=\"14\">" << escape_xml(spec.title) << "</text>\n"
      << "<rect x=\"" << px(kLeft) << "\" y=\"" << px(kTop) << "\" width=\"" << px(plot_w)
      << "\" height=\"" << px(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";

  // Axes and ticks.
  std::vector<double> x_ticks;
  if (spec.log_x) {
    for (double e = std::ceil(x_lo); e <= x_hi + 1e-9; e += 1.0) x_ticks.push_back(std::pow(10.0, e));
    if (x_ticks.size() < 2) {
      for (double t : nice_ticks(std::pow(10.0, x_lo), std::pow(10.0, x_hi), 5)) {
        if (t > 0) x_ticks.push_back(t);
      }
    }
  } else {
    x_ticks = nice_ticks(x_lo, x_hi, 6);
  }
  for (double t : x_ticks) {
    svg << "<line x1=\"" << px(sx(t)) << "\" y1=\"" << px(kTop + plot_h) << "\" x2=\"" << px(sx(t))
        << "\" y2=\"" << px(kTop + plot_h + 5) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << px(sx(t)) << "\" y=\"" << px(kTop + plot_h + 18)
        << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
  }
  for (double t : nice_ticks(y_lo, y_hi, 6)) {
    svg << "<line x1=\"" << px(kLeft - 5) << "\" y1=\"" << px(sy(t)) << "\" x2=\"" << px(kLeft)
        << "\" y2=\"" << px(sy(t)) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << px(kLeft - 8) << "\" y=\"" << px(sy(t) + 4)
        << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
  }
  svg << "<text x=\"" << px(kLeft + plot_w / 2) << "\" y=\"" << px(kHeight - 12)
      << "\" text-anchor=\"middle\">" << escape_xml(spec.x_label) << "</text>\n"
      << "<text x=\"16\" y=\"" << px(kTop + plot_h / 2) << "\" text-anchor=\"middle\" "
      << "transform=\"rotate(-90 16 " << px(kTop + plot_h / 2) << ")\">"
      << escape_xml(spec.y_label) << "</text>\n";

  for (std::size_t s = 0; s < order.size(); ++s) {
    const std::string color = kColors[s % std::size(kColors)];
    auto pts = series[order[s]];
    std::stable_sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x < b.x; });

    std::string line, overlay_line;
    for (const auto& p : pts) {
      if (std::isfinite(p.y)) line += px(sx(p.x)) + "," + px(sy(p.y)) + " ";
      if (std::isfinite(p.overlay)) overlay_line += px(sx(p.x)) + "," + px(sy(p.overlay)) + " ";
    }
    if (!line.empty()) {
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\""
          << line << "\"/>\n";
    }
    if (!overlay_line.empty()) {
      svg << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1\" stroke-dasharray=\"5,3\" points=\"" << overlay_line << "\"/>\n";
    }
    for (const auto& p : pts) {
      if (!std::isfinite(p.y)) continue;
      if (std::isfinite(p.err) && p.err > 0.0) {
        svg << "<line x1=\"" << px(sx(p.x)) << "\" y1=\"" << px(sy(p.y - p.err)) << "\" x2=\""
            << px(sx(p.x)) << "\" y2=\"" << px(sy(p.y + p.err)) << "\" stroke=\"" << color
            << "\"/>\n";
      }
      svg << "<circle cx=\"" << px(sx(p.x)) << "\" cy=\"" << px(sy(p.y)) << "\" r=\"2.5\" fill=\""
          << color << "\"/>\n";
    }
    const double ly = kTop + 12 + 16 * static_cast<double>(s);
    svg << "<line x1=\"" << px(kLeft + plot_w + 10) << "\" y1=\"" << px(ly) << "\" x2=\""
        << px(kLeft + plot_w + 28) << "\" y2=\"" << px(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << px(kLeft + plot_w + 32) << "\" y=\"" << px(ly + 4) << "\">"
        << escape_xml(order[s]) << "</text>\n";
  }
  if (has_overlay) {
    const double ly = kTop + 12 + 16 * static_cast<double>(order.size());
    svg << "<line x1=\"" << px(kLeft + plot_w + 10) << "\" y1=\"" << px(ly) << "\" x2=\""
        << px(kLeft + plot_w + 28) << "\" y2=\"" << px(ly)
        << "\" stroke=\"black\" stroke-dasharray=\"5,3\"/>\n"
        << "<text x=\"" << px(kLeft + plot_w + 32) << "\" y=\"" << px(ly + 4)
        << "\">closed form</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace opmi
