#include "idkit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "idkit/error.hpp"
#include "idkit/serialize.hpp"

namespace idkit::svg {
namespace {

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(lo <= hi)) {
      lo = 0;
      hi = 1;
      return;
    }
    const double margin = hi > lo ? 0.05 * (hi - lo) : 0.5;
    lo -= margin;
    hi += margin;
  }
};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  // Two decimals keep files small; geometry is exact to 0.005 units.
  return format_double(std::round(v * 100.0) / 100.0);
}

double map_x(double v, const Range& r) {
  return kLeft + (v - r.lo) / (r.hi - r.lo) * (kRight - kLeft);
}
double map_y(double v, const Range& r) {
  return kBottom - (v - r.lo) / (r.hi - r.lo) * (kBottom - kTop);
}

const char* color(std::size_t i) {
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#9467bd", "#ff7f0e", "#17becf"};
  return kPalette[i % 6];
}

void open(std::ostringstream& os, const ChartOptions& opts) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kWidth
     << ' ' << kHeight << "\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" fill=\"white\"/>\n";
  if (!opts.title.empty()) {
    os << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\">"
       << escape(opts.title) << "</text>\n";
  }
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\""
     << kRight - kLeft << "\" height=\"" << kBottom - kTop
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  if (!opts.x_label.empty()) {
    os << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kHeight - 16
       << "\" text-anchor=\"middle\">" << escape(opts.x_label) << "</text>\n";
  }
  if (!opts.y_label.empty()) {
    os << "<text x=\"16\" y=\"" << (kTop + kBottom) / 2
       << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << (kTop + kBottom) / 2 << ")\">" << escape(opts.y_label) << "</text>\n";
  }
}

void axis_ticks(std::ostringstream& os, const Range& xr, const Range& yr) {
  for (int i = 0; i <= 4; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    const double px = map_x(fx, xr);
    os << "<text x=\"" << num(px) << "\" y=\"" << kBottom + 16
       << "\" text-anchor=\"middle\">" << num(fx) << "</text>\n";
    const double fy = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    const double py = map_y(fy, yr);
    os << "<text x=\"" << kLeft - 4 << "\" y=\"" << num(py + 4)
       << "\" text-anchor=\"end\">" << num(fy) << "</text>\n";
  }
}

}  // namespace

std::string scatter(std::span<const Series> series, const ChartOptions& opts) {
  Range xr, yr;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) {
      throw DataError("series '" + s.name + "' has mismatched x/y lengths");
    }
    if (!s.point_labels.empty() && s.point_labels.size() != s.x.size()) {
      throw DataError("series '" + s.name + "' has mismatched label count");
    }
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  xr.pad();
  yr.pad();

  std::ostringstream os;
  open(os, opts);
  axis_ticks(os, xr, yr);
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    os << "<g class=\"series\" data-name=\"" << escape(s.name) << "\" fill=\""
       << color(si) << "\" stroke=\"" << color(si) << "\">\n";
    if (opts.lines && s.x.size() > 1) {
      os << "<polyline fill=\"none\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        os << (i ? " " : "") << num(map_x(s.x[i], xr)) << ','
           << num(map_y(s.y[i], yr));
      }
      os << "\"/>\n";
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double px = map_x(s.x[i], xr);
      const double py = map_y(s.y[i], yr);
      os << "<circle cx=\"" << num(px) << "\" cy=\"" << num(py) << "\" r=\"3\"/>\n";
      if (!s.point_labels.empty()) {
        os << "<text x=\"" << num(px + 5) << "\" y=\"" << num(py - 5)
           << "\" stroke=\"none\">" << escape(s.point_labels[i]) << "</text>\n";
      }
    }
    os << "</g>\n";
  }
  if (series.size() > 1) {
    for (std::size_t si = 0; si < series.size(); ++si) {
      os << "<text x=\"" << kRight - 4 << "\" y=\"" << kTop + 16 + 14 * si
         << "\" text-anchor=\"end\" fill=\"" << color(si) << "\">"
         << escape(series[si].name) << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

std::string morris_plot(std::span<const std::string> names,
                        std::span<const double> mu_star,
                        std::span<const double> sigma, const std::string& title) {
  if (names.size() != mu_star.size() || names.size() != sigma.size()) {
    throw DataError("morris plot inputs have mismatched lengths");
  }
  Series s{"features", {mu_star.begin(), mu_star.end()},
           {sigma.begin(), sigma.end()}, {names.begin(), names.end()}};
  return scatter(std::span<const Series>(&s, 1), {title, "mu*", "sigma", false});
}

std::string bars(std::span<const std::string> names,
                 std::span<const double> values, const ChartOptions& opts) {
  if (names.size() != values.size()) {
    throw DataError("bar chart inputs have mismatched lengths");
  }
  Range vr;
  vr.add(0);
  for (double v : values) vr.add(v);
  vr.pad();

  std::ostringstream os;
  open(os, opts);
  const double band = names.empty() ? 0 : (kBottom - kTop) / names.size();
  const double zero = map_x(0, vr);
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double end = map_x(values[i], vr);
    const double y = kTop + band * i + band * 0.15;
    os << "<rect x=\"" << num(std::min(zero, end)) << "\" y=\"" << num(y)
       << "\" width=\"" << num(std::abs(end - zero)) << "\" height=\""
       << num(band * 0.7) << "\" fill=\"" << color(0) << "\"/>\n";
    os << "<text x=\"" << kLeft - 4 << "\" y=\"" << num(y + band * 0.35 + 4)
       << "\" text-anchor=\"end\">" << escape(names[i]) << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double fv = vr.lo + (vr.hi - vr.lo) * i / 4.0;
    os << "<text x=\"" << num(map_x(fv, vr)) << "\" y=\"" << kBottom + 16
       << "\" text-anchor=\"middle\">" << num(fv) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace idkit::svg
