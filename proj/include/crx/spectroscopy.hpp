#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crx/dataset.hpp"
#include "crx/error.hpp"

namespace crx {

// Exact value in half units; window medians can land on x.5.
struct HalfUnits {
  std::int64_t halves = 0;

  static constexpr HalfUnits whole(std::int64_t v) noexcept { return {2 * v}; }

  double value() const noexcept { return static_cast<double>(halves) / 2.0; }

  // "4", "-3", "2.5", "-0.5"
  std::string to_string() const {
    const std::int64_t whole_part = halves / 2;
    if (halves % 2 == 0) return std::to_string(whole_part);
    const bool negative = halves < 0;
    const std::int64_t magnitude = (negative ? -halves : halves) / 2;
    return (negative ? "-" : "") + std::to_string(magnitude) + ".5";
  }

  friend auto operator<=>(const HalfUnits&, const HalfUnits&) = default;
};

struct YearPoint {
  int year = 0;
  std::int64_t n_cr = 0;
  HalfUnits deviation;

  friend bool operator==(const YearPoint&, const YearPoint&) = default;
};

// Gapless per-year occurrence counts with their deviation from the
// (2 * half_window + 1)-year median.
struct YearSeries {
  std::vector<YearPoint> points;
  int half_window = 2;

  bool empty() const noexcept { return points.empty(); }
};

// Median of values in half units; even counts average the two middle values.
inline HalfUnits median_of(std::vector<std::int64_t> values) {
  if (values.empty()) return {};
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const std::int64_t upper = values[mid];
  if (values.size() % 2 == 1) return HalfUnits::whole(upper);
  const std::int64_t lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return {lower + upper};
}

// Deviation of each count from the median of its window; positions outside
// the series count as zero.
inline std::vector<HalfUnits> median_deviation(const std::vector<std::int64_t>& counts,
                                               int half_window) {
  if (half_window < 1) throw InvalidArgument("half window must be at least 1");
  const auto n = static_cast<std::int64_t>(counts.size());
  std::vector<HalfUnits> out(counts.size());
  std::vector<std::int64_t> window;
  window.reserve(static_cast<std::size_t>(2 * half_window + 1));
  for (std::int64_t i = 0; i < n; ++i) {
    window.clear();
    for (std::int64_t j = i - half_window; j <= i + half_window; ++j)
      window.push_back(j >= 0 && j < n ? counts[static_cast<std::size_t>(j)] : 0);
    const HalfUnits med = median_of(window);
    out[static_cast<std::size_t>(i)] = {2 * counts[static_cast<std::size_t>(i)] - med.halves};
  }
  return out;
}

// Year-less references are left out of the chart.
inline YearSeries year_series(const Dataset& ds, int half_window = 2) {
  if (half_window < 1) throw InvalidArgument("half window must be at least 1");
  YearSeries series;
  series.half_window = half_window;

  std::map<int, std::int64_t> per_year;
  for (const auto& [year, n] : ds.totals)
    if (year) per_year[*year] += n;
  if (per_year.empty()) return series;

  const int first = per_year.begin()->first;
  const int last = per_year.rbegin()->first;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(last - first + 1), 0);
  for (const auto& [year, n] : per_year) counts[static_cast<std::size_t>(year - first)] = n;

  const std::vector<HalfUnits> dev = median_deviation(counts, half_window);
  series.points.reserve(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    series.points.push_back({first + static_cast<int>(i), counts[i], dev[i]});
  return series;
}

// Points with from <= year <= to; deviations are those of the full series.
inline YearSeries slice(const YearSeries& series, std::optional<int> from, std::optional<int> to) {
  YearSeries out;
  out.half_window = series.half_window;
  for (const auto& p : series.points)
    if ((!from || p.year >= *from) && (!to || p.year <= *to)) out.points.push_back(p);
  return out;
}

inline std::string export_chart_csv(const YearSeries& series) {
  std::string out = "Year,N_CR,Median Deviation\n";
  for (const auto& p : series.points) {
    out += std::to_string(p.year);
    out += ',';
    out += std::to_string(p.n_cr);
    out += ',';
    out += p.deviation.to_string();
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// SVG rendering

struct ChartOptions {
  bool show_count = true;
  bool show_deviation = true;
  double line_width = 2.0;
  std::string title = "Reference Publication Year Spectroscopy";
  std::string x_label = "Cited Reference Year";
  std::string y_label = "Cited References";
  std::optional<int> from_year;
  std::optional<int> to_year;
  int width = 800;
  int height = 450;
};

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  return s == "-0.00" ? "0.00" : s;
}

// Smallest step from the 1-2-5 ladder giving at most max_ticks intervals.
inline std::int64_t nice_step(std::int64_t span, std::int64_t max_ticks) {
  std::int64_t base = 1;
  for (;;) {
    for (std::int64_t m : {1, 2, 5}) {
      const std::int64_t step = m * base;
      if (span / step <= max_ticks) return step;
    }
    base *= 10;
  }
}

inline std::int64_t floor_to(std::int64_t v, std::int64_t step) {
  const std::int64_t q = v / step;
  return (q * step > v ? q - 1 : q) * step;
}

}  // namespace detail

// Static SVG 1.1 chart: count curve in red, deviation curve in blue.
inline std::string render_chart_svg(const YearSeries& series, const ChartOptions& opt = {}) {
  using detail::fmt2;
  const YearSeries view = slice(series, opt.from_year, opt.to_year);

  int x_min = 0;
  int x_max = 1;
  if (!view.empty()) {
    x_min = view.points.front().year;
    x_max = view.points.back().year;
  }
  if (opt.from_year) x_min = *opt.from_year;
  if (opt.to_year) x_max = *opt.to_year;
  if (x_max <= x_min) x_max = x_min + 1;

  std::int64_t y_lo = 0;
  std::int64_t y_hi = 1;
  for (const auto& p : view.points) {
    if (opt.show_count) y_hi = std::max(y_hi, p.n_cr);
    if (opt.show_deviation) {
      y_hi = std::max(y_hi, (p.deviation.halves + 1) / 2);
      y_lo = std::min(y_lo, detail::floor_to(p.deviation.halves, 2) / 2);
    }
  }
  const std::int64_t y_step = detail::nice_step(y_hi - y_lo, 8);
  y_lo = detail::floor_to(y_lo, y_step);
  y_hi = -detail::floor_to(-y_hi, y_step);

  const double left = 70, right = 20, top = 40, bottom = 60;
  const double plot_w = opt.width - left - right;
  const double plot_h = opt.height - top - bottom;
  auto px = [&](double year) { return left + (year - x_min) / double(x_max - x_min) * plot_w; };
  auto py = [&](double v) {
    return top + plot_h - (v - double(y_lo)) / double(y_hi - y_lo) * plot_h;
  };

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         std::to_string(opt.width) + "\" height=\"" + std::to_string(opt.height) +
         "\" viewBox=\"0 0 " + std::to_string(opt.width) + " " + std::to_string(opt.height) +
         "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + fmt2(opt.width / 2.0) +
         "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
         detail::xml_escape(opt.title) + "</text>\n";

  // Axes
  out += "<g stroke=\"black\" stroke-width=\"1\">\n";
  out += "<line x1=\"" + fmt2(left) + "\" y1=\"" + fmt2(top + plot_h) + "\" x2=\"" +
         fmt2(left + plot_w) + "\" y2=\"" + fmt2(top + plot_h) + "\"/>\n";
  out += "<line x1=\"" + fmt2(left) + "\" y1=\"" + fmt2(top) + "\" x2=\"" + fmt2(left) +
         "\" y2=\"" + fmt2(top + plot_h) + "\"/>\n";
  out += "</g>\n";

  out += "<g class=\"x-ticks\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">\n";
  const std::int64_t x_step = detail::nice_step(x_max - x_min, 12);
  std::vector<std::int64_t> x_ticks{x_min};
  for (std::int64_t t = detail::floor_to(x_min, x_step) + x_step; t < x_max; t += x_step)
    if (t > x_min) x_ticks.push_back(t);
  x_ticks.push_back(x_max);
  for (std::int64_t t : x_ticks) {
    const std::string x = fmt2(px(double(t)));
    out += "<line x1=\"" + x + "\" y1=\"" + fmt2(top + plot_h) + "\" x2=\"" + x + "\" y2=\"" +
           fmt2(top + plot_h + 5) + "\" stroke=\"black\"/>";
    out += "<text x=\"" + x + "\" y=\"" + fmt2(top + plot_h + 18) + "\">" + std::to_string(t) +
           "</text>\n";
  }
  out += "</g>\n";

  out += "<g class=\"y-ticks\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">\n";
  for (std::int64_t t = y_lo; t <= y_hi; t += y_step) {
    const std::string y = fmt2(py(double(t)));
    out += "<line x1=\"" + fmt2(left - 5) + "\" y1=\"" + y + "\" x2=\"" + fmt2(left) +
           "\" y2=\"" + y + "\" stroke=\"black\"/>";
    out += "<text x=\"" + fmt2(left - 8) + "\" y=\"" + fmt2(py(double(t)) + 4) + "\">" +
           std::to_string(t) + "</text>\n";
  }
  out += "</g>\n";

  out += "<text x=\"" + fmt2(left + plot_w / 2) + "\" y=\"" + fmt2(opt.height - 15.0) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
         detail::xml_escape(opt.x_label) + "</text>\n";
  out += "<text x=\"18\" y=\"" + fmt2(top + plot_h / 2) + "\" transform=\"rotate(-90 18 " +
         fmt2(top + plot_h / 2) +
         ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
         detail::xml_escape(opt.y_label) + "</text>\n";

  auto polyline = [&](const char* cls, const char* colour, auto value_of) {
    out += "<polyline class=\"" + std::string(cls) + "\" fill=\"none\" stroke=\"" + colour +
           "\" stroke-width=\"" + fmt2(opt.line_width) + "\" points=\"";
    bool first = true;
    for (const auto& p : view.points) {
      if (!first) out += ' ';
      out += fmt2(px(p.year)) + "," + fmt2(py(value_of(p)));
      first = false;
    }
    out += "\"/>\n";
  };
  if (!view.empty() && opt.show_count)
    polyline("n-cr", "red", [](const YearPoint& p) { return double(p.n_cr); });
  if (!view.empty() && opt.show_deviation)
    polyline("median-deviation", "blue", [](const YearPoint& p) { return p.deviation.value(); });

  out += "</svg>\n";
  return out;
}

}  // namespace crx
