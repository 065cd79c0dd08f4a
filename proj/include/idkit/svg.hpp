#pragma once

#include <span>
#include <string>
#include <vector>

namespace idkit::svg {

// Every chart uses viewBox="0 0 640 480". The plot area is the rectangle
// x in [64, 608], y in [32, 416]; data are mapped linearly from their
// min/max (padded by 5% of the range, or by 0.5 when the range is zero)
// onto that rectangle, with y growing upward in data space.
inline constexpr double kWidth = 640;
inline constexpr double kHeight = 480;
inline constexpr double kLeft = 64;
inline constexpr double kRight = 608;
inline constexpr double kTop = 32;
inline constexpr double kBottom = 416;

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<std::string> point_labels;  // optional, one per point
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool lines = false;  // connect points in input order
};

// Scatter (or polyline) chart of one or more series.
std::string scatter(std::span<const Series> series, const ChartOptions& opts);

// Morris plot: one labeled point per feature at (mu_star, sigma).
std::string morris_plot(std::span<const std::string> names,
                        std::span<const double> mu_star,
                        std::span<const double> sigma,
                        const std::string& title = "Morris screening");

// Horizontal bar chart, one bar per name; used for Sobol S1/ST.
std::string bars(std::span<const std::string> names,
                 std::span<const double> values, const ChartOptions& opts);

}  // namespace idkit::svg
