#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idkit/metrics.hpp"

namespace idkit {

// One trained-and-evaluated subset: its structure and its score.
struct ExperimentRecord {
  FeatureVector features;
  double f1 = 0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::string subset_id;
};

// ---- correlation ----------------------------------------------------------

struct CorrelationResult {
  std::string feature;
  std::size_t n = 0;
  double pearson = 0;
  double spearman = 0;
  double pearson_p = 1;   // two-sided, Student-t approximation
  double spearman_p = 1;
};

double pearson(std::span<const double> x, std::span<const double> y);
// Pearson over average ranks (ties share the mean rank).
double spearman(std::span<const double> x, std::span<const double> y);
std::vector<double> average_ranks(std::span<const double> values);
// Two-sided p-value of r under H0: rho = 0 with n - 2 degrees of freedom.
double correlation_p_value(double r, std::size_t n);

// Needs >= 3 records; throws DataError naming a constant series.
CorrelationResult correlate(std::span<const ExperimentRecord> records,
                            std::string_view feature);
// Same, for two raw series labeled x and y.
CorrelationResult correlate_series(std::span<const double> x,
                                   std::span<const double> y,
                                   std::string_view x_name = "x",
                                   std::string_view y_name = "y");

// ---- response surfaces ----------------------------------------------------

struct Bounds {
  double lo = 0;
  double hi = 1;
};

enum class SurfaceKind { kKnnSurrogate, kExternalCommand, kFunction };

// A callable model of the score over a box of inputs. Coordinates passed to
// evaluate() are physical (inside bounds), not normalized.
class ResponseSurface {
 public:
  using Fn = std::function<double(std::span<const double>)>;

  static ResponseSurface from_function(std::vector<Bounds> bounds, Fn fn,
                                       std::vector<std::string> names = {});
  // Runs `command` once per point with a JSON object {name: value, ...} on
  // stdin; the command must print one real number.
  static ResponseSurface external_command(
      std::string command, std::vector<Bounds> bounds,
      std::vector<std::string> names = {},
      std::chrono::milliseconds timeout = std::chrono::seconds(60));

  SurfaceKind kind() const { return kind_; }
  std::size_t dims() const { return bounds_.size(); }
  const std::vector<Bounds>& bounds() const { return bounds_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<ExperimentRecord>& records() const { return records_; }
  const std::string& command() const { return command_; }
  std::size_t k() const { return k_; }

  // Failures are rethrown as BackendError carrying the coordinates.
  double evaluate(std::span<const double> x) const;
  // Evaluates rows of `points` (row-major, dims() columns) on up to
  // `workers` threads; results are ordered like the input.
  std::vector<double> evaluate_batch(std::span<const double> points,
                                     std::size_t workers = 1) const;

 private:
  friend ResponseSurface fit_knn_surrogate(
      std::span<const ExperimentRecord> records, std::size_t k);
  ResponseSurface() = default;

  SurfaceKind kind_ = SurfaceKind::kFunction;
  std::vector<Bounds> bounds_;
  std::vector<std::string> names_;
  Fn fn_;
  std::vector<ExperimentRecord> records_;
  std::string command_;
  std::size_t k_ = 0;
};

// Per-feature [min, max] over the records. Constant features are widened to
// a small symmetric interval so every bound satisfies lo < hi.
std::vector<Bounds> record_bounds(std::span<const ExperimentRecord> records);

// Inverse-distance-weighted k-NN over features normalized to record bounds.
// A query that coincides with a record returns that record's f1 exactly.
// Needs k >= 1 and at least max(k, 4) records.
ResponseSurface fit_knn_surrogate(std::span<const ExperimentRecord> records,
                                  std::size_t k);

// ---- Morris screening -----------------------------------------------------

struct MorrisOptions {
  std::size_t trajectories = 20;
  std::size_t levels = 6;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct MorrisResult {
  std::vector<std::string> names;
  std::vector<double> mu_star;
  std::vector<double> mu;
  std::vector<double> sigma;
  std::size_t trajectories = 0;
  std::size_t levels = 0;
  double delta = 0;
};

// Random one-at-a-time trajectories on a `levels`-grid over the unit cube
// with step levels / (2 (levels - 1)). Elementary effects are measured per
// unit of normalized input.
MorrisResult run_morris(const ResponseSurface& surface,
                        const MorrisOptions& opts = {});

// ---- Sobol indices --------------------------------------------------------

struct SobolOptions {
  std::size_t base_samples = 1024;
  std::uint64_t seed = 0;
  std::size_t bootstrap = 1000;
  std::size_t workers = 1;
};

struct SobolResult {
  std::vector<std::string> names;
  std::vector<double> s1;
  std::vector<double> st;
  std::vector<std::array<double, 2>> s1_ci95;
  std::vector<std::array<double, 2>> st_ci95;
  std::size_t base_samples = 0;
  std::size_t bootstrap = 0;
};

// Saltelli A/B/AB design from a 2d-dimensional Sobol sequence; first-order
// indices by Saltelli (2010), total-order by Jansen; 95% intervals from a
// row bootstrap (estimate +/- 1.96 bootstrap standard deviations).
// base_samples must be a power of two >= 64. Throws DataError
// "response surface is flat" when the output variance vanishes.
SobolResult run_sobol(const ResponseSurface& surface,
                      const SobolOptions& opts = {});

}  // namespace idkit
