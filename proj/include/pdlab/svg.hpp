#pragma once
// Self-contained SVG renderers for the two figure families: relative PD vs
// log2 of the shuffling window (log y axis), and relative PD vs excess loss
// with per-point log2 z annotations (log-log). No plotting dependency;
// output is a pure function of the input series.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace pdlab {

struct FigurePoint {
  double x = 0.0;
  double y = 0.0;
  std::string label;  // drawn next to the marker when nonempty
};

struct FigureSeries {
  std::string label;
  std::vector<FigurePoint> points;
};

namespace svgdetail {

inline constexpr int kWidth = 720;
inline constexpr int kHeight = 480;
inline constexpr double kLeft = 84.0;
inline constexpr double kRight = 700.0;
inline constexpr double kTop = 36.0;
inline constexpr double kBottom = 420.0;

inline const char* series_color(std::size_t i) {
  static constexpr const char* kPalette[] = {
      "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
      "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string decade_label(int exp10) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "1e%d", exp10);
  return buf;
}

struct Axis {
  bool log_scale = false;
  double lo = 0.0;
  double hi = 1.0;  // in transformed units (log10 when log_scale)

  double transform(double v, double floor_value) const {
    if (!log_scale) return v;
    return std::log10(std::max(v, floor_value));
  }
};

// Picks a positive floor so zero-valued points (an exact null control) sit on
// the bottom edge instead of breaking the log scale.
inline double log_floor(const std::vector<FigureSeries>& series,
                        bool use_x) {
  double min_pos = std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      const double v = use_x ? p.x : p.y;
      if (v > 0.0 && v < min_pos) min_pos = v;
    }
  }
  if (!std::isfinite(min_pos)) return 1e-12;
  return std::pow(10.0, std::floor(std::log10(min_pos)) - 1.0);
}

inline Axis fit_axis(const std::vector<FigureSeries>& series, bool use_x,
                     bool log_scale, double floor_value) {
  Axis ax;
  ax.log_scale = log_scale;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      const double t = ax.transform(use_x ? p.x : p.y, floor_value);
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (log_scale) {
    lo = std::floor(lo);
    hi = std::ceil(hi);
    if (hi - lo < 1.0) hi = lo + 1.0;
  } else if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  ax.lo = lo;
  ax.hi = hi;
  return ax;
}

inline double map_x(const Axis& ax, double t) {
  return kLeft + (t - ax.lo) / (ax.hi - ax.lo) * (kRight - kLeft);
}

inline double map_y(const Axis& ax, double t) {
  return kBottom - (t - ax.lo) / (ax.hi - ax.lo) * (kBottom - kTop);
}

inline void open_svg(std::ostringstream& out) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight
      << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  out << "<g font-family=\"monospace\" font-size=\"12\">\n";
}

inline void close_svg(std::ostringstream& out) { out << "</g>\n</svg>\n"; }

inline void draw_frame(std::ostringstream& out) {
  out << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\""
      << num(kRight - kLeft) << "\" height=\"" << num(kBottom - kTop)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
}

inline void draw_y_decades(std::ostringstream& out, const Axis& ay) {
  for (int e = static_cast<int>(std::ceil(ay.lo)); e <= static_cast<int>(std::floor(ay.hi));
       ++e) {
    const double y = map_y(ay, static_cast<double>(e));
    out << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(y) << "\" x2=\""
        << num(kLeft) << "\" y2=\"" << num(y) << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(y) << "\" x2=\""
        << num(kRight) << "\" y2=\"" << num(y)
        << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
    out << "<text x=\"" << num(kLeft - 9) << "\" y=\"" << num(y + 4)
        << "\" text-anchor=\"end\">" << decade_label(e) << "</text>\n";
  }
}

inline void draw_x_decades(std::ostringstream& out, const Axis& ax) {
  for (int e = static_cast<int>(std::ceil(ax.lo)); e <= static_cast<int>(std::floor(ax.hi));
       ++e) {
    const double x = map_x(ax, static_cast<double>(e));
    out << "<line x1=\"" << num(x) << "\" y1=\"" << num(kBottom) << "\" x2=\"" << num(x)
        << "\" y2=\"" << num(kBottom + 5) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(x) << "\" y=\"" << num(kBottom + 18)
        << "\" text-anchor=\"middle\">" << decade_label(e) << "</text>\n";
  }
}

inline void draw_axis_titles(std::ostringstream& out, const std::string& xtitle,
                             const std::string& ytitle) {
  out << "<text x=\"" << num(0.5 * (kLeft + kRight)) << "\" y=\"" << num(kBottom + 38)
      << "\" text-anchor=\"middle\">" << xtitle << "</text>\n";
  out << "<text x=\"16\" y=\"" << num(0.5 * (kTop + kBottom))
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << num(0.5 * (kTop + kBottom)) << ")\">" << ytitle << "</text>\n";
}

inline void draw_series(std::ostringstream& out, const std::vector<FigureSeries>& series,
                        const Axis& ax, const Axis& ay, double xfloor, double yfloor) {
  for (std::size_t si = 0; si < series.size(); ++si) {
    const char* color = series_color(si);
    const auto& pts = series[si].points;
    if (pts.size() > 1) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
      for (const auto& p : pts) {
        out << num(map_x(ax, ax.transform(p.x, xfloor))) << ","
            << num(map_y(ay, ay.transform(p.y, yfloor))) << " ";
      }
      out << "\"/>\n";
    }
    for (const auto& p : pts) {
      const double cx = map_x(ax, ax.transform(p.x, xfloor));
      const double cy = map_y(ay, ay.transform(p.y, yfloor));
      out << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy)
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      if (!p.label.empty()) {
        out << "<text x=\"" << num(cx + 5) << "\" y=\"" << num(cy - 5) << "\" fill=\""
            << color << "\" font-size=\"10\">" << p.label << "</text>\n";
      }
    }
  }
}

inline void draw_legend(std::ostringstream& out, const std::vector<FigureSeries>& series) {
  const double x = kLeft + 10;
  double y = kTop + 16;
  for (std::size_t si = 0; si < series.size(); ++si) {
    out << "<line x1=\"" << num(x) << "\" y1=\"" << num(y - 4) << "\" x2=\""
        << num(x + 22) << "\" y2=\"" << num(y - 4) << "\" stroke=\"" << series_color(si)
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << num(x + 28) << "\" y=\"" << num(y) << "\">"
        << series[si].label << "</text>\n";
    y += 16;
  }
}

}  // namespace svgdetail

// Relative PD (log axis) against log2 z (linear axis, ticks at the data's
// integer z exponents).
inline std::string render_pd_vs_logz(const std::vector<FigureSeries>& series) {
  using namespace svgdetail;
  std::ostringstream out;
  open_svg(out);
  draw_frame(out);
  const double yfloor = log_floor(series, /*use_x=*/false);
  const Axis ax = fit_axis(series, /*use_x=*/true, /*log_scale=*/false, 0.0);
  const Axis ay = fit_axis(series, /*use_x=*/false, /*log_scale=*/true, yfloor);
  draw_y_decades(out, ay);
  std::vector<double> xticks;
  for (const auto& s : series) {
    for (const auto& p : s.points) xticks.push_back(p.x);
  }
  std::sort(xticks.begin(), xticks.end());
  xticks.erase(std::unique(xticks.begin(), xticks.end()), xticks.end());
  for (const double t : xticks) {
    const double x = map_x(ax, t);
    out << "<line x1=\"" << num(x) << "\" y1=\"" << num(kBottom) << "\" x2=\"" << num(x)
        << "\" y2=\"" << num(kBottom + 5) << "\" stroke=\"black\"/>\n";
    char buf[16];
    std::snprintf(buf, sizeof buf, "%g", t);
    out << "<text x=\"" << num(x) << "\" y=\"" << num(kBottom + 18)
        << "\" text-anchor=\"middle\">" << buf << "</text>\n";
  }
  draw_axis_titles(out, "log2 z", "relative PD");
  draw_series(out, series, ax, ay, 0.0, yfloor);
  draw_legend(out, series);
  close_svg(out);
  return out.str();
}

// Relative PD against excess loss, both on log axes, each point annotated
// with its log2 z.
inline std::string render_pd_vs_loss(const std::vector<FigureSeries>& series) {
  using namespace svgdetail;
  std::ostringstream out;
  open_svg(out);
  draw_frame(out);
  const double xfloor = log_floor(series, /*use_x=*/true);
  const double yfloor = log_floor(series, /*use_x=*/false);
  const Axis ax = fit_axis(series, /*use_x=*/true, /*log_scale=*/true, xfloor);
  const Axis ay = fit_axis(series, /*use_x=*/false, /*log_scale=*/true, yfloor);
  draw_y_decades(out, ay);
  draw_x_decades(out, ax);
  draw_axis_titles(out, "excess loss (nats)", "relative PD");
  draw_series(out, series, ax, ay, xfloor, yfloor);
  draw_legend(out, series);
  close_svg(out);
  return out.str();
}

}  // namespace pdlab
