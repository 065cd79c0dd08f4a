#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "idkit/corpus.hpp"
#include "idkit/metrics.hpp"

namespace idkit {

enum class SubsetStrategy { kStratified, kDensityFamily };

struct SubsetSpec {
  std::uint64_t seed = 0;
  SubsetStrategy strategy = SubsetStrategy::kStratified;
  double p = 1.0;          // density_family: retained share of D_E
  std::size_t count = 23;  // stratified: number of subsets
  std::size_t rarity_bins = 4;
  // When set, every entity-bearing bin shares one sampling rate, so the
  // rarity mix of retained entity sentences tracks the parent corpus.
  bool rarity_control = true;

  void validate() const;
};

// A named sampling stratum and the rate it was sampled at.
struct BinRate {
  std::string bin;
  std::size_t population = 0;
  std::size_t retained = 0;
  double rate = 0;
};

struct SubsetManifest {
  SubsetSpec spec;
  std::vector<std::size_t> sentence_ids;  // sorted, into the parent corpus
  FeatureVector features;
  std::vector<BinRate> bins;
};

// D_p = D_E' ∪ D_O with |D_E'| = ceil(p |D_E|). D_E is split into
// `rarity_bins` quantile bins by the corpus frequency of each sentence's
// rarest entity; the bins are shuffled and interleaved proportionally into one
// order that is cut at different lengths. For the same seed a smaller p keeps
// a subset of what a larger p keeps, and each bin keeps its share of D_E' to
// within one sentence. rarity_bins = 1 is a plain random cut. Throws DataError
// if D_E is empty.
SubsetManifest build_density_subset(const Corpus& corpus, double p,
                                    std::uint64_t seed,
                                    const FeatureConfig& cfg = {},
                                    std::size_t rarity_bins = 4);

// The nested family for the given rates (one manifest per p).
std::vector<SubsetManifest> build_density_family(
    const Corpus& corpus, const std::vector<double>& rates, std::uint64_t seed,
    const FeatureConfig& cfg = {}, std::size_t rarity_bins = 4);

// `spec.count` subsets with spread-out structural features. Sentences are
// binned into D_O plus `rarity_bins` quantile bins of D_E ordered by the
// corpus frequency of their rarest entity; per-bin sampling rates come from
// a randomly shifted Sobol design.
std::vector<SubsetManifest> build_stratified_subsets(
    const Corpus& corpus, const SubsetSpec& spec, const FeatureConfig& cfg = {});

// Rarity bin (1-based, 0 = no entity) of every sentence, as used by the
// stratified builder.
std::vector<std::size_t> rarity_bin_of(const Corpus& corpus,
                                       std::size_t rarity_bins);

// Selected sentences in parent order with contiguous ids.
Corpus materialize(const Corpus& corpus, const SubsetManifest& manifest);

// Throws DataError unless ids are valid and recomputed features match the
// manifest within `tolerance`.
void verify_manifest(const Corpus& corpus, const SubsetManifest& manifest,
                     const FeatureConfig& cfg = {}, double tolerance = 1e-12);

}  // namespace idkit
