#include "idkit/gsa.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "idkit/error.hpp"
#include "idkit/lowdisc.hpp"
#include "idkit/parallel.hpp"
#include "idkit/random.hpp"
#include "idkit/subprocess.hpp"

namespace idkit {

namespace {

double mean(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; });
}

std::vector<std::string> default_names(std::size_t dims) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < dims; ++i) {
    names.push_back("x" + std::to_string(i + 1));
  }
  return names;
}

std::string format_point(std::span<const double> x) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

void check_bounds(const std::vector<Bounds>& bounds) {
  if (bounds.empty()) throw UsageError("response surface needs >= 1 input");
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (!(bounds[i].lo < bounds[i].hi) || !std::isfinite(bounds[i].lo) ||
        !std::isfinite(bounds[i].hi)) {
      throw UsageError("bounds of input " + std::to_string(i) +
                       " must satisfy lo < hi");
    }
  }
}

}  // namespace

// ---- correlation ----------------------------------------------------------

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DataError("pearson needs two series of equal length >= 2");
  }
  const double mx = mean(x), my = mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) throw DataError("pearson of a constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j + 1);  // mean of i+1..j
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

double correlation_p_value(double r, std::size_t n) {
  if (n <= 2) return 1.0;
  if (std::abs(r) >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t = r * std::sqrt(df / (1.0 - r * r));
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

CorrelationResult correlate_series(std::span<const double> x,
                                   std::span<const double> y,
                                   std::string_view x_name,
                                   std::string_view y_name) {
  if (x.size() != y.size()) throw DataError("series lengths differ");
  if (x.size() < 3) {
    throw DataError("correlation needs at least 3 records, got " +
                    std::to_string(x.size()));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw DataError("non-finite value in record " + std::to_string(i));
    }
  }
  if (is_constant(x)) {
    throw DataError("'" + std::string(x_name) + "' is constant across records");
  }
  if (is_constant(y)) {
    throw DataError("'" + std::string(y_name) + "' is constant across records");
  }
  CorrelationResult r;
  r.feature = std::string(x_name);
  r.n = x.size();
  r.pearson = pearson(x, y);
  r.spearman = spearman(x, y);
  r.pearson_p = correlation_p_value(r.pearson, r.n);
  r.spearman_p = correlation_p_value(r.spearman, r.n);
  return r;
}

CorrelationResult correlate(std::span<const ExperimentRecord> records,
                            std::string_view feature) {
  const std::size_t idx = feature_index(feature);
  std::vector<double> x, y;
  x.reserve(records.size());
  y.reserve(records.size());
  for (const auto& r : records) {
    x.push_back(r.features[idx]);
    y.push_back(r.f1);
  }
  return correlate_series(x, y, feature, "f1");
}

// ---- response surfaces ----------------------------------------------------

ResponseSurface ResponseSurface::from_function(std::vector<Bounds> bounds,
                                               Fn fn,
                                               std::vector<std::string> names) {
  check_bounds(bounds);
  if (names.empty()) names = default_names(bounds.size());
  if (names.size() != bounds.size()) {
    throw UsageError("one name per surface input is required");
  }
  ResponseSurface s;
  s.kind_ = SurfaceKind::kFunction;
  s.bounds_ = std::move(bounds);
  s.names_ = std::move(names);
  s.fn_ = std::move(fn);
  return s;
}

ResponseSurface ResponseSurface::external_command(
    std::string command, std::vector<Bounds> bounds,
    std::vector<std::string> names, std::chrono::milliseconds timeout) {
  if (command.empty()) throw UsageError("external command is empty");
  if (names.empty()) names = default_names(bounds.size());
  auto fn = [command, names, timeout](std::span<const double> x) {
    nlohmann::ordered_json payload = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < x.size(); ++i) payload[names[i]] = x[i];
    const auto res = run_shell(command, payload.dump() + "\n", timeout);
    if (res.exit_code != 0) {
      throw BackendError("command exited with status " +
                         std::to_string(res.exit_code) + ": " + res.err);
    }
    std::istringstream is(res.out);
    double value = 0;
    std::string rest;
    if (!(is >> value) || (is >> rest) || !std::isfinite(value)) {
      throw BackendError("command must print one real number, got '" +
                         res.out + "'");
    }
    return value;
  };
  auto s = from_function(std::move(bounds), std::move(fn), std::move(names));
  s.kind_ = SurfaceKind::kExternalCommand;
  s.command_ = std::move(command);
  return s;
}

double ResponseSurface::evaluate(std::span<const double> x) const {
  if (x.size() != dims()) throw UsageError("point dimension mismatch");
  try {
    const double y = fn_(x);
    if (!std::isfinite(y)) throw DataError("non-finite response");
    return y;
  } catch (const std::exception& e) {
    throw BackendError("surface evaluation failed at " + format_point(x) +
                       ": " + e.what());
  }
}

std::vector<double> ResponseSurface::evaluate_batch(
    std::span<const double> points, std::size_t workers) const {
  const std::size_t d = dims();
  if (points.size() % d != 0) throw UsageError("point matrix shape mismatch");
  std::vector<double> out(points.size() / d);
  parallel_for(out.size(), workers, [&](std::size_t i) {
    out[i] = evaluate(points.subspan(i * d, d));
  });
  return out;
}

std::vector<Bounds> record_bounds(std::span<const ExperimentRecord> records) {
  if (records.empty()) throw DataError("no records");
  std::vector<Bounds> b(kFeatureCount);
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    double lo = records[0].features[i], hi = lo;
    for (const auto& r : records) {
      lo = std::min(lo, r.features[i]);
      hi = std::max(hi, r.features[i]);
    }
    if (!(lo < hi)) {
      const double pad = std::max(1e-6, 1e-3 * std::abs(lo));
      lo -= pad;
      hi += pad;
    }
    b[i] = {lo, hi};
  }
  return b;
}

ResponseSurface fit_knn_surrogate(std::span<const ExperimentRecord> records,
                                  std::size_t k) {
  if (k < 1) throw UsageError("k must be >= 1");
  if (records.size() < std::max<std::size_t>(k, 4)) {
    throw DataError("k-NN surrogate needs at least max(k, 4) records, got " +
                    std::to_string(records.size()));
  }
  auto bounds = record_bounds(records);
  const std::size_t d = kFeatureCount;
  std::vector<double> norm(records.size() * d);
  std::vector<double> f1(records.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    for (std::size_t i = 0; i < d; ++i) {
      norm[r * d + i] = (records[r].features[i] - bounds[i].lo) /
                        (bounds[i].hi - bounds[i].lo);
    }
    f1[r] = records[r].f1;
  }
  auto fn = [bounds, norm = std::move(norm), f1 = std::move(f1), k,
             d](std::span<const double> x) {
    const std::size_t n = f1.size();
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t r = 0; r < n; ++r) {
      double s = 0;
      for (std::size_t i = 0; i < d; ++i) {
        const double q = (x[i] - bounds[i].lo) / (bounds[i].hi - bounds[i].lo);
        const double diff = q - norm[r * d + i];
        s += diff * diff;
      }
      dist[r] = {std::sqrt(s), r};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k),
                      dist.end());
    if (dist[0].first == 0.0) return f1[dist[0].second];
    double wsum = 0, acc = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const double w = 1.0 / dist[j].first;
      wsum += w;
      acc += w * f1[dist[j].second];
    }
    return acc / wsum;
  };
  std::vector<std::string> names(kFeatureNames.begin(), kFeatureNames.end());
  auto s = ResponseSurface::from_function(std::move(bounds), std::move(fn),
                                          std::move(names));
  s.kind_ = SurfaceKind::kKnnSurrogate;
  s.records_.assign(records.begin(), records.end());
  s.k_ = k;
  return s;
}

// ---- Morris ---------------------------------------------------------------

MorrisResult run_morris(const ResponseSurface& surface,
                        const MorrisOptions& opts) {
  if (opts.levels < 4 || opts.levels % 2 != 0) {
    throw UsageError("Morris levels must be even and >= 4");
  }
  if (opts.trajectories < 2) {
    throw UsageError("Morris needs at least 2 trajectories");
  }
  const std::size_t d = surface.dims();
  const std::size_t r = opts.trajectories;
  const double grid = static_cast<double>(opts.levels - 1);
  const double delta =
      static_cast<double>(opts.levels) / (2.0 * grid);

  // Unit-cube trajectories: r blocks of d + 1 points, plus which input moved
  // at each step and by how much.
  std::vector<double> unit(r * (d + 1) * d);
  std::vector<std::size_t> moved(r * d);
  std::vector<double> step(r * d);
  Rng rng(derive_seed(opts.seed, "gsa/morris"));
  for (std::size_t t = 0; t < r; ++t) {
    double* x = &unit[t * (d + 1) * d];
    for (std::size_t i = 0; i < d; ++i) {
      x[i] = static_cast<double>(uniform_index(rng, opts.levels)) / grid;
    }
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    shuffle(std::span(order), rng);
    for (std::size_t s = 0; s < d; ++s) {
      const std::size_t i = order[s];
      double* prev = x + s * d;
      double* next = prev + d;
      std::copy(prev, prev + d, next);
      const double dx = prev[i] + delta <= 1.0 + 1e-12 ? delta : -delta;
      next[i] = std::clamp(prev[i] + dx, 0.0, 1.0);
      moved[t * d + s] = i;
      step[t * d + s] = dx;
    }
  }

  std::vector<double> physical(unit.size());
  const auto& b = surface.bounds();
  for (std::size_t p = 0; p < unit.size(); ++p) {
    const auto& bi = b[p % d];
    physical[p] = bi.lo + unit[p] * (bi.hi - bi.lo);
  }
  const auto y = surface.evaluate_batch(physical, opts.workers);

  std::vector<std::vector<double>> effects(d);
  for (std::size_t t = 0; t < r; ++t) {
    for (std::size_t s = 0; s < d; ++s) {
      const std::size_t base = t * (d + 1) + s;
      effects[moved[t * d + s]].push_back((y[base + 1] - y[base]) /
                                          step[t * d + s]);
    }
  }

  MorrisResult res;
  res.names = surface.names();
  res.trajectories = r;
  res.levels = opts.levels;
  res.delta = delta;
  for (std::size_t i = 0; i < d; ++i) {
    const auto& ee = effects[i];
    double abs_sum = 0;
    for (double e : ee) abs_sum += std::abs(e);
    const double m = mean(ee);
    double ss = 0;
    for (double e : ee) ss += (e - m) * (e - m);
    res.mu_star.push_back(abs_sum / static_cast<double>(ee.size()));
    res.mu.push_back(m);
    res.sigma.push_back(std::sqrt(ss / static_cast<double>(ee.size() - 1)));
  }
  return res;
}

// ---- Sobol ----------------------------------------------------------------

namespace {

struct SobolEstimates {
  std::vector<double> s1;
  std::vector<double> st;
};

// y holds fA (n), fB (n), then fAB_i (n each). `rows` picks the sample rows
// (identity for the point estimate, a resample for bootstrap).
SobolEstimates sobol_estimate(std::span<const double> y, std::size_t n,
                              std::size_t d, std::span<const std::size_t> rows) {
  const double* fa = y.data();
  const double* fb = y.data() + n;
  double m = 0;
  for (auto j : rows) m += fa[j] + fb[j];
  m /= static_cast<double>(2 * rows.size());
  double var = 0;
  for (auto j : rows) {
    var += (fa[j] - m) * (fa[j] - m) + (fb[j] - m) * (fb[j] - m);
  }
  var /= static_cast<double>(2 * rows.size());

  SobolEstimates e;
  for (std::size_t i = 0; i < d; ++i) {
    const double* fab = y.data() + (2 + i) * n;
    double first = 0, total = 0;
    for (auto j : rows) {
      first += fb[j] * (fab[j] - fa[j]);
      total += (fa[j] - fab[j]) * (fa[j] - fab[j]);
    }
    const double count = static_cast<double>(rows.size());
    e.s1.push_back(var > 0 ? first / count / var : 0.0);
    e.st.push_back(var > 0 ? 0.5 * total / count / var : 0.0);
  }
  return e;
}

std::array<double, 2> normal_ci(double estimate, std::span<const double> reps) {
  if (reps.size() < 2) return {estimate, estimate};
  const double m = mean(reps);
  double ss = 0;
  for (double v : reps) ss += (v - m) * (v - m);
  const double sd = std::sqrt(ss / static_cast<double>(reps.size() - 1));
  return {estimate - 1.959963984540054 * sd, estimate + 1.959963984540054 * sd};
}

}  // namespace

SobolResult run_sobol(const ResponseSurface& surface, const SobolOptions& opts) {
  const std::size_t n = opts.base_samples;
  if (n < 64 || (n & (n - 1)) != 0) {
    throw UsageError("Sobol base_samples must be a power of two >= 64");
  }
  const std::size_t d = surface.dims();
  const auto& b = surface.bounds();

  // Rows: A, B, AB_0 .. AB_{d-1}; each n points of d physical coordinates.
  std::vector<double> points((2 + d) * n * d);
  SobolSequence seq(2 * d);
  std::vector<double> u(2 * d);
  auto put = [&](std::size_t block, std::size_t j, std::size_t i, double v) {
    points[(block * n + j) * d + i] = b[i].lo + v * (b[i].hi - b[i].lo);
  };
  for (std::size_t j = 0; j < n; ++j) {
    seq.next(u);
    for (std::size_t i = 0; i < d; ++i) {
      put(0, j, i, u[i]);
      put(1, j, i, u[d + i]);
      for (std::size_t k = 0; k < d; ++k) put(2 + k, j, i, k == i ? u[d + i] : u[i]);
    }
  }
  const auto y = surface.evaluate_batch(points, opts.workers);

  {
    double m = 0;
    for (std::size_t j = 0; j < 2 * n; ++j) m += y[j];
    m /= static_cast<double>(2 * n);
    double var = 0;
    for (std::size_t j = 0; j < 2 * n; ++j) var += (y[j] - m) * (y[j] - m);
    var /= static_cast<double>(2 * n);
    if (!(var > 1e-12 * std::max(1.0, m * m))) {
      throw DataError("response surface is flat");
    }
  }

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  const auto point = sobol_estimate(y, n, d, all);

  // Each replicate owns its seed, so scheduling cannot change the result.
  std::vector<SobolEstimates> reps(opts.bootstrap);
  parallel_for(opts.bootstrap, opts.workers, [&](std::size_t rep) {
    Rng rng(derive_seed(opts.seed, "gsa/sobol/bootstrap", rep));
    std::vector<std::size_t> rows(n);
    for (auto& j : rows) j = static_cast<std::size_t>(uniform_index(rng, n));
    reps[rep] = sobol_estimate(y, n, d, rows);
  });
  std::vector<std::vector<double>> s1_reps(d), st_reps(d);
  for (const auto& e : reps) {
    for (std::size_t i = 0; i < d; ++i) {
      s1_reps[i].push_back(e.s1[i]);
      st_reps[i].push_back(e.st[i]);
    }
  }

  SobolResult res;
  res.names = surface.names();
  res.s1 = point.s1;
  res.st = point.st;
  res.base_samples = n;
  res.bootstrap = opts.bootstrap;
  for (std::size_t i = 0; i < d; ++i) {
    res.s1_ci95.push_back(normal_ci(point.s1[i], s1_reps[i]));
    res.st_ci95.push_back(normal_ci(point.st[i], st_reps[i]));
  }
  return res;
}

}  // namespace idkit
