#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "idkit/gsa.hpp"
#include "idkit/metrics.hpp"

namespace idkit {

struct AttentionMeta {
  std::string corpus_id;
  std::string sentence_id;
  std::string model_name;
  // Any further header fields, kept as JSON text.
  std::map<std::string, std::string> extra;

  bool operator==(const AttentionMeta&) const = default;
};

// Attention weights [layer][head][query][key], row-major.
struct AttentionTensor {
  std::size_t layers = 0;
  std::size_t heads = 0;
  std::size_t seq_len = 0;
  std::vector<float> weights;
  AttentionMeta meta;

  AttentionTensor() = default;
  AttentionTensor(std::size_t layers, std::size_t heads, std::size_t seq_len,
                  AttentionMeta meta = {});

  std::size_t matrix_size() const { return seq_len * seq_len; }
  std::span<const float> matrix(std::size_t layer, std::size_t head) const;
  std::span<float> matrix(std::size_t layer, std::size_t head);
  std::span<const float> row(std::size_t layer, std::size_t head,
                             std::size_t query) const;
  std::span<float> row(std::size_t layer, std::size_t head, std::size_t query);

  // Throws DataError for L < 2, a shape mismatch, or a row that is not a
  // distribution (negative, non-finite, or sum off by more than tolerance);
  // the message cites (layer, head, row).
  void validate(double row_sum_tolerance = 1e-4) const;

  bool operator==(const AttentionTensor&) const = default;
};

enum class AsaMode { kRowWise1d, kFull2d };
enum class AsaWeight { kBinIndex, kNormalizedFrequency };
enum class AsaAggregate { kMean, kPerLayer };

struct AsaConfig {
  AsaMode mode = AsaMode::kRowWise1d;
  AsaWeight weight = AsaWeight::kBinIndex;
  AsaAggregate aggregate = AsaAggregate::kMean;
};

struct AsaResult {
  double asa = 0;                 // mean over rows, heads and layers
  std::vector<double> per_layer;  // filled when aggregate == kPerLayer
};

// sum_k w_k |F_k|^2 / sum_k |F_k|^2 for one sequence, over the one-sided
// bins k = 0..L/2 with w_k = k (or k / floor(L/2)).
double spectral_centroid(std::span<const double> row, AsaWeight weight);

// Attention spectrum score of one tensor. Row-wise mode averages the row
// scores; full-2d mode scores each L x L matrix by radial frequency.
AsaResult compute_asa(const AttentionTensor& tensor, const AsaConfig& cfg = {});

struct DensityAsaInput {
  std::string label;
  FeatureVector subset_features;
  std::vector<AttentionTensor> tensors;
};

struct DensityAsaRow {
  std::string label;
  double ned = 0;
  double mean_asa = 0;
  std::size_t tensors = 0;
};

struct DensityAsaTable {
  std::vector<DensityAsaRow> rows;  // sorted by (ned, mean_asa, label)
  std::optional<CorrelationResult> correlation;
  std::string note;  // why correlation is missing, if it is
};

DensityAsaTable asa_vs_density(std::span<const DensityAsaInput> records,
                               const AsaConfig& cfg = {});

}  // namespace idkit
