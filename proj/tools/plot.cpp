#include "plot.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "driftwatch/errors.hpp"

namespace driftwatch::plot {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 400;
constexpr double kLeft = 70;
constexpr double kRight = 20;
constexpr double kTop = 30;
constexpr double kBottom = 50;

std::string fmt(double v, int precision) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

struct Axes {
  double x0, x1, y0, y1;

  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void frame(std::ostringstream& svg, const std::string& title, const std::string& xlabel, const std::string& ylabel) {
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"18\" text-anchor=\"middle\">" << title << "</text>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight << "\" y2=\""
      << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kHeight - kBottom
      << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  svg << "<text x=\"15\" y=\"" << (kTop + kHeight - kBottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << (kTop + kHeight - kBottom) / 2 << ")\">" << ylabel << "</text>\n";
}

void y_ticks(std::ostringstream& svg, const Axes& ax, int precision) {
  for (int i = 0; i <= 4; ++i) {
    const double v = ax.y0 + (ax.y1 - ax.y0) * i / 4.0;
    const double y = ax.py(v);
    svg << "<line class=\"ytick\" x1=\"" << kLeft - 5 << "\" y1=\"" << fmt(y, 2) << "\" x2=\"" << kLeft << "\" y2=\""
        << fmt(y, 2) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(y + 4, 2) << "\" text-anchor=\"end\">" << fmt(v, precision)
        << "</text>\n";
  }
}

}  // namespace

std::vector<AccuracyRow> parse_accuracy_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line.rfind("query_id,timestamp,correct", 0) != 0) {
    throw InputError("accuracy CSV must start with the header query_id,timestamp,correct,...");
  }
  std::vector<AccuracyRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      cells.push_back(cell);
    }
    if (cells.size() < 3) {
      throw InputError("accuracy CSV line " + std::to_string(line_no) + " has too few columns");
    }
    try {
      rows.push_back({cells[0], std::stod(cells[1]), std::stoi(cells[2]) != 0});
    } catch (const std::exception&) {
      throw InputError("accuracy CSV line " + std::to_string(line_no) + " is malformed");
    }
  }
  if (rows.empty()) {
    throw InputError("accuracy CSV has no frames");
  }
  return rows;
}

std::string curve_svg(const CalibrationResult& cal) {
  const auto& th = cal.curve.thresholds;
  const auto& cv = cal.curve.cv_values;
  if (th.empty()) {
    throw InputError("calibration file has no curve to plot");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : cv) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  const double pad = hi > lo ? 0.1 * (hi - lo) : std::max(1e-6, 0.1 * std::abs(hi));
  const Axes ax{th.front(), th.size() > 1 ? th.back() : th.front() + 1.0, std::max(0.0, lo - pad), hi + pad};

  std::ostringstream svg;
  frame(svg, "Mean coefficient of variation per matching threshold", "matching threshold", "cv");
  for (double t : th) {
    const double x = ax.px(t);
    svg << "<line class=\"xtick\" x1=\"" << fmt(x, 2) << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << fmt(x, 2)
        << "\" y2=\"" << kHeight - kBottom + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fmt(x, 2) << "\" y=\"" << kHeight - kBottom + 18 << "\" text-anchor=\"middle\">"
        << fmt(t, 1) << "</text>\n";
  }
  y_ticks(svg, ax, 5);
  svg << "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2\" points=\"";
  bool first = true;
  for (std::size_t i = 0; i < th.size(); ++i) {
    if (std::isfinite(cv[i])) {
      svg << (first ? "" : " ") << fmt(ax.px(th[i]), 2) << ',' << fmt(ax.py(cv[i]), 2);
      first = false;
    }
  }
  svg << "\"/>\n";
  const auto k = std::find_if(th.begin(), th.end(), [&](double t) { return std::abs(t - cal.selected_delta) < 1e-9; });
  if (k != th.end() && std::isfinite(cv[static_cast<std::size_t>(k - th.begin())])) {
    const double x = ax.px(*k);
    const double y = ax.py(cv[static_cast<std::size_t>(k - th.begin())]);
    svg << "<circle class=\"knee\" cx=\"" << fmt(x, 2) << "\" cy=\"" << fmt(y, 2)
        << "\" r=\"6\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << fmt(x + 8, 2) << "\" y=\"" << fmt(y - 8, 2) << "\">knee " << fmt(cal.selected_delta, 1)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string curve_csv(const CalibrationResult& cal) {
  std::ostringstream out;
  out << "threshold,cv,knee\n";
  for (std::size_t i = 0; i < cal.curve.thresholds.size(); ++i) {
    const double t = cal.curve.thresholds[i];
    const double v = cal.curve.cv_values[i];
    out << fmt(t, 6) << ',' << (std::isfinite(v) ? fmt(v, 12) : std::string()) << ','
        << (std::abs(t - cal.selected_delta) < 1e-9 ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string accuracy_svg(const std::vector<AccuracyRow>& rows) {
  if (rows.empty()) {
    throw InputError("no frames to plot");
  }
  const double t0 = rows.front().timestamp;
  const double t1 = std::max(rows.back().timestamp, t0 + 1e-9);
  const Axes ax{t0, t1, 0.0, 1.0};
  std::ostringstream svg;
  frame(svg, "Anomaly detection accuracy over time", "time [s]", "accuracy");
  for (int i = 0; i <= 4; ++i) {
    const double t = t0 + (t1 - t0) * i / 4.0;
    const double x = ax.px(t);
    svg << "<line class=\"xtick\" x1=\"" << fmt(x, 2) << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << fmt(x, 2)
        << "\" y2=\"" << kHeight - kBottom + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fmt(x, 2) << "\" y=\"" << kHeight - kBottom + 18 << "\" text-anchor=\"middle\">"
        << fmt(t, 1) << "</text>\n";
  }
  y_ticks(svg, ax, 2);
  svg << "<polyline fill=\"none\" stroke=\"#2c3e50\" stroke-width=\"2\" points=\"";
  std::size_t correct = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    correct += rows[i].correct;
    svg << (i ? " " : "") << fmt(ax.px(rows[i].timestamp), 2) << ','
        << fmt(ax.py(static_cast<double>(correct) / static_cast<double>(i + 1)), 2);
  }
  svg << "\"/>\n</svg>\n";
  return svg.str();
}

std::string accuracy_csv(const std::vector<AccuracyRow>& rows) {
  std::ostringstream out;
  out << "timestamp,running_accuracy\n";
  std::size_t correct = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    correct += rows[i].correct;
    out << fmt(rows[i].timestamp, 6) << ',' << fmt(static_cast<double>(correct) / static_cast<double>(i + 1), 6)
        << '\n';
  }
  return out.str();
}

}  // namespace driftwatch::plot
