#pragma once

// Bare SVG 1.1 output: polyline charts and a cell heatmap. No styling knobs.

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "qrecover/csv.hpp"
#include "qrecover/error.hpp"

namespace qrecover {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

namespace detail {

inline constexpr double kPlotWidth = 640.0;
inline constexpr double kPlotHeight = 480.0;
inline constexpr double kMargin = 60.0;

struct Extent {
  double lo = 0.0;
  double hi = 1.0;

  void pad() {
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
  double map(double v, double a, double b) const { return a + (v - lo) / (hi - lo) * (b - a); }
};

inline Extent extent_of(const std::vector<const std::vector<double>*>& cols) {
  Extent e{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto* c : cols)
    for (double v : *c)
      if (std::isfinite(v)) {
        e.lo = std::min(e.lo, v);
        e.hi = std::max(e.hi, v);
      }
  if (!std::isfinite(e.lo)) throw Error(Errc::EmptyInput, "nothing to plot");
  e.pad();
  return e;
}

inline void svg_open(std::ostream& out, const std::string& title) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kPlotWidth << "\" height=\""
      << kPlotHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kPlotWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title
      << "</text>\n";
}

inline void svg_axes(std::ostream& out, const Extent& ex, const Extent& ey, const std::string& xlabel,
                     const std::string& ylabel) {
  const double x0 = kMargin, x1 = kPlotWidth - kMargin, y0 = kPlotHeight - kMargin, y1 = kMargin;
  out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0 << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1 << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double t = k / 4.0;
    const double xv = ex.lo + t * (ex.hi - ex.lo);
    const double yv = ey.lo + t * (ey.hi - ey.lo);
    const double px = x0 + t * (x1 - x0);
    const double py = y0 + t * (y1 - y0);
    out << "<text x=\"" << px << "\" y=\"" << y0 + 18 << "\" text-anchor=\"middle\" font-size=\"11\">"
        << format_real(std::round(xv * 1e4) / 1e4) << "</text>\n"
        << "<text x=\"" << x0 - 6 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
        << format_real(std::round(yv * 1e4) / 1e4) << "</text>\n";
  }
  out << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kPlotHeight - 16 << "\" text-anchor=\"middle\" font-size=\"13\">"
      << xlabel << "</text>\n"
      << "<text x=\"16\" y=\"" << (y0 + y1) / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
      << (y0 + y1) / 2 << ")\">" << ylabel << "</text>\n";
}

}  // namespace detail

inline void write_line_svg(std::ostream& out, std::span<const Series> series, const std::string& xlabel,
                           const std::string& ylabel, const std::string& title) {
  if (series.empty()) throw Error(Errc::EmptyInput, "no series to plot");
  std::vector<const std::vector<double>*> xs, ys;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw Error(Errc::InvalidArgument, "series '" + s.label + "' has mismatched x/y");
    xs.push_back(&s.x);
    ys.push_back(&s.y);
  }
  const auto ex = detail::extent_of(xs);
  const auto ey = detail::extent_of(ys);
  static constexpr const char* kColors[] = {"#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad", "#d35400", "#222222"};

  detail::svg_open(out, title);
  detail::svg_axes(out, ex, ey, xlabel, ylabel);
  const double x0 = detail::kMargin, x1 = detail::kPlotWidth - detail::kMargin;
  const double y0 = detail::kPlotHeight - detail::kMargin, y1 = detail::kMargin;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) pts.emplace_back(s.x[i], s.y[i]);
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    const char* color = kColors[k % std::size(kColors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) out << ex.map(x, x0, x1) << ',' << ey.map(y, y0, y1) << ' ';
    out << "\"/>\n";
    out << "<text x=\"" << x1 - 4 << "\" y=\"" << y1 + 14 + 14 * static_cast<double>(k)
        << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">" << s.label << "</text>\n";
  }
  out << "</svg>\n";
}

// Cells on the distinct (x, y) values; NaN values and missing cells stay blank.
inline void write_heatmap_svg(std::ostream& out, const std::vector<double>& x, const std::vector<double>& y,
                              const std::vector<double>& z, const std::string& xlabel, const std::string& ylabel,
                              const std::string& title) {
  if (x.size() != y.size() || x.size() != z.size())
    throw Error(Errc::InvalidArgument, "heatmap columns differ in length");
  if (x.empty()) throw Error(Errc::EmptyInput, "nothing to plot");
  std::map<double, std::size_t> xi, yi;
  for (double v : x)
    if (std::isfinite(v)) xi.emplace(v, 0);
  for (double v : y)
    if (std::isfinite(v)) yi.emplace(v, 0);
  if (xi.empty() || yi.empty()) throw Error(Errc::EmptyInput, "nothing to plot");
  std::size_t n = 0;
  for (auto& [v, k] : xi) k = n++;
  n = 0;
  for (auto& [v, k] : yi) k = n++;

  const auto ez = detail::extent_of({&z});
  const detail::Extent ex{xi.begin()->first, xi.rbegin()->first};
  const detail::Extent ey{yi.begin()->first, yi.rbegin()->first};
  detail::svg_open(out, title);
  detail::svg_axes(out, ex, ey, xlabel, ylabel);

  const double x0 = detail::kMargin, x1 = detail::kPlotWidth - detail::kMargin;
  const double y0 = detail::kPlotHeight - detail::kMargin, y1 = detail::kMargin;
  const double cw = (x1 - x0) / static_cast<double>(xi.size());
  const double ch = (y0 - y1) / static_cast<double>(yi.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]) || !std::isfinite(z[i])) continue;
    const double t = ez.hi > ez.lo ? (z[i] - ez.lo) / (ez.hi - ez.lo) : 0.5;
    // dark blue -> yellow
    const int red = static_cast<int>(std::lround(30 + t * 225));
    const int green = static_cast<int>(std::lround(30 + t * 200));
    const int blue = static_cast<int>(std::lround(120 - t * 100));
    out << "<rect x=\"" << x0 + cw * static_cast<double>(xi[x[i]]) << "\" y=\""
        << y0 - ch * static_cast<double>(yi[y[i]] + 1) << "\" width=\"" << cw << "\" height=\"" << ch
        << "\" fill=\"rgb(" << red << ',' << green << ',' << blue << ")\"/>\n";
  }
  out << "<text x=\"" << x1 << "\" y=\"" << y1 - 8 << "\" text-anchor=\"end\" font-size=\"11\">range "
      << format_real(ez.lo) << " .. " << format_real(ez.hi) << "</text>\n";
  out << "</svg>\n";
}

}  // namespace qrecover
