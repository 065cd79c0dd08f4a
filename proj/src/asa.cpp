#include "idkit/asa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "idkit/error.hpp"
#include "idkit/spectrum.hpp"

namespace idkit {

namespace {

std::string where(std::size_t layer, std::size_t head, std::size_t row) {
  return "(layer " + std::to_string(layer) + ", head " + std::to_string(head) +
         ", row " + std::to_string(row) + ")";
}

// Power that is indistinguishable from FFT roundoff for an input of this
// mass is treated as zero, so a constant row scores exactly 0.
double roundoff_floor(double mass) {
  const double amp = 16.0 * std::numeric_limits<double>::epsilon() * mass;
  return amp * amp;
}

double weighted_ratio(std::span<const double> power, std::span<const double> w,
                      double floor) {
  double num = 0, den = 0;
  for (std::size_t k = 0; k < power.size(); ++k) {
    const double p = power[k] <= floor ? 0.0 : power[k];
    num += w[k] * p;
    den += p;
  }
  return den > 0 ? num / den : 0.0;
}

double matrix_score_2d(std::span<const float> m, std::size_t L, AsaWeight weight) {
  std::vector<double> x(m.begin(), m.end());
  double mass = 0;
  for (double v : x) mass += std::abs(v);
  const auto power = power_spectrum_2d(x, L, L);
  const double half = static_cast<double>(L / 2);
  std::vector<double> w(power.size());
  for (std::size_t u = 0; u < L; ++u) {
    const double fu = static_cast<double>(std::min(u, L - u));
    for (std::size_t v = 0; v < L; ++v) {
      const double fv = static_cast<double>(std::min(v, L - v));
      const double k = std::round(std::sqrt(fu * fu + fv * fv));
      w[u * L + v] = weight == AsaWeight::kBinIndex ? k : k / half;
    }
  }
  return weighted_ratio(power, w, roundoff_floor(mass));
}

}  // namespace

AttentionTensor::AttentionTensor(std::size_t l, std::size_t h, std::size_t n,
                                 AttentionMeta m)
    : layers(l), heads(h), seq_len(n), weights(l * h * n * n, 0.0f),
      meta(std::move(m)) {}

std::span<const float> AttentionTensor::matrix(std::size_t layer,
                                               std::size_t head) const {
  return std::span<const float>(weights).subspan(
      (layer * heads + head) * matrix_size(), matrix_size());
}
std::span<float> AttentionTensor::matrix(std::size_t layer, std::size_t head) {
  return std::span<float>(weights).subspan(
      (layer * heads + head) * matrix_size(), matrix_size());
}
std::span<const float> AttentionTensor::row(std::size_t layer, std::size_t head,
                                            std::size_t query) const {
  return matrix(layer, head).subspan(query * seq_len, seq_len);
}
std::span<float> AttentionTensor::row(std::size_t layer, std::size_t head,
                                      std::size_t query) {
  return matrix(layer, head).subspan(query * seq_len, seq_len);
}

void AttentionTensor::validate(double tol) const {
  if (layers < 1 || heads < 1) {
    throw DataError("attention tensor needs >= 1 layer and >= 1 head");
  }
  if (seq_len < 2) {
    throw DataError("attention sequence length must be >= 2, got " +
                    std::to_string(seq_len));
  }
  if (weights.size() != layers * heads * seq_len * seq_len) {
    throw DataError("attention payload size does not match its shape");
  }
  for (std::size_t l = 0; l < layers; ++l) {
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t q = 0; q < seq_len; ++q) {
        double sum = 0;
        for (float v : row(l, h, q)) {
          if (!std::isfinite(v) || v < 0.0f) {
            throw DataError("attention weight is negative or not finite at " +
                            where(l, h, q));
          }
          sum += v;
        }
        if (std::abs(sum - 1.0) > tol) {
          throw DataError("attention row sums to " + std::to_string(sum) +
                          " at " + where(l, h, q));
        }
      }
    }
  }
}

double spectral_centroid(std::span<const double> row, AsaWeight weight) {
  const std::size_t L = row.size();
  if (L < 2) throw DataError("spectrum needs a sequence of length >= 2");
  double mass = 0;
  for (double v : row) mass += std::abs(v);
  const auto power = power_spectrum(row);
  const double half = static_cast<double>(L / 2);
  std::vector<double> w(power.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    w[k] = weight == AsaWeight::kBinIndex ? static_cast<double>(k)
                                          : static_cast<double>(k) / half;
  }
  return weighted_ratio(power, w, roundoff_floor(mass));
}

AsaResult compute_asa(const AttentionTensor& tensor, const AsaConfig& cfg) {
  tensor.validate();
  const std::size_t L = tensor.seq_len;
  AsaResult result;
  std::vector<double> layer_scores(tensor.layers, 0.0);
  std::vector<double> buf(L);
  for (std::size_t l = 0; l < tensor.layers; ++l) {
    double layer_sum = 0;
    for (std::size_t h = 0; h < tensor.heads; ++h) {
      if (cfg.mode == AsaMode::kFull2d) {
        layer_sum += matrix_score_2d(tensor.matrix(l, h), L, cfg.weight);
        continue;
      }
      double head_sum = 0;
      for (std::size_t q = 0; q < L; ++q) {
        const auto r = tensor.row(l, h, q);
        std::copy(r.begin(), r.end(), buf.begin());
        head_sum += spectral_centroid(buf, cfg.weight);
      }
      layer_sum += head_sum / static_cast<double>(L);
    }
    layer_scores[l] = layer_sum / static_cast<double>(tensor.heads);
  }
  double total = 0;
  for (double v : layer_scores) total += v;
  result.asa = total / static_cast<double>(tensor.layers);
  if (cfg.aggregate == AsaAggregate::kPerLayer) {
    result.per_layer = std::move(layer_scores);
  }
  return result;
}

DensityAsaTable asa_vs_density(std::span<const DensityAsaInput> records,
                               const AsaConfig& cfg) {
  DensityAsaTable table;
  for (const auto& rec : records) {
    if (rec.tensors.empty()) {
      throw DataError("subset '" + rec.label + "' has no attention tensors");
    }
    double sum = 0;
    for (const auto& t : rec.tensors) sum += compute_asa(t, cfg).asa;
    table.rows.push_back({rec.label, rec.subset_features.ned,
                          sum / static_cast<double>(rec.tensors.size()),
                          rec.tensors.size()});
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const auto& a, const auto& b) {
    return std::tie(a.ned, a.mean_asa, a.label) <
           std::tie(b.ned, b.mean_asa, b.label);
  });
  if (table.rows.size() < 3) {
    table.note = "correlation unavailable: needs at least 3 subsets";
    return table;
  }
  std::vector<double> ned, asa;
  for (const auto& r : table.rows) {
    ned.push_back(r.ned);
    asa.push_back(r.mean_asa);
  }
  try {
    table.correlation = correlate_series(ned, asa, "ned", "asa");
  } catch (const DataError& e) {
    table.note = std::string("correlation unavailable: ") + e.what();
  }
  return table;
}

}  // namespace idkit
