#include "idkit/resample.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include "idkit/error.hpp"
#include "idkit/lowdisc.hpp"
#include "idkit/random.hpp"

namespace idkit {

namespace {

// Lowest rate any stratum is sampled at in stratified designs.
constexpr double kMinRate = 0.1;
constexpr std::size_t kMaxRedraws = 16;

std::size_t retained_count(double rate, std::size_t n) {
  // Guard against 0.7 * 10 == 7.000000000000001.
  const double want = std::ceil(rate * static_cast<double>(n) - 1e-9);
  return std::min(n, static_cast<std::size_t>(std::max(want, 0.0)));
}

std::string fold_case(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

SubsetManifest finish(const Corpus& corpus, SubsetSpec spec,
                      std::vector<std::size_t> ids, std::vector<BinRate> bins,
                      const FeatureConfig& cfg) {
  std::sort(ids.begin(), ids.end());
  SubsetManifest m{std::move(spec), std::move(ids), {}, std::move(bins)};
  m.features = compute_features(materialize(corpus, m), cfg);
  return m;
}

}  // namespace

void SubsetSpec::validate() const {
  if (strategy == SubsetStrategy::kDensityFamily &&
      !(p >= 0.5 && p <= 1.0)) {
    throw UsageError("density family rate p must lie in [0.5, 1.0]");
  }
  if (strategy == SubsetStrategy::kStratified && count < 2) {
    throw UsageError("stratified sampling needs count >= 2");
  }
  if (rarity_bins < 1) throw UsageError("rarity_bins must be >= 1");
}

SubsetManifest build_density_subset(const Corpus& corpus, double p,
                                    std::uint64_t seed, const FeatureConfig& cfg,
                                    std::size_t rarity_bins) {
  SubsetSpec spec;
  spec.seed = seed;
  spec.strategy = SubsetStrategy::kDensityFamily;
  spec.p = p;
  spec.count = 1;
  spec.rarity_bins = rarity_bins;
  spec.rarity_control = rarity_bins > 1;
  spec.validate();

  const auto bin_of = rarity_bin_of(corpus, rarity_bins);
  std::vector<std::vector<std::size_t>> members(rarity_bins + 1);
  for (const auto& s : corpus.sentences()) members[bin_of[s.id()]].push_back(s.id());
  std::size_t entity_total = 0;
  for (std::size_t b = 1; b <= rarity_bins; ++b) entity_total += members[b].size();
  if (entity_total == 0) throw DataError("corpus has no entity-bearing sentences");

  // Interleave the shuffled bins proportionally: member j of bin b gets key
  // (j + u_b) / n_b. Every prefix of the merged order then holds each bin
  // within one sentence of its proportional share, and prefixes nest.
  Rng rng(derive_seed(seed, "resample/density"));
  std::vector<std::tuple<double, std::size_t, std::size_t>> order;  // key, bin, id
  for (std::size_t b = 1; b <= rarity_bins; ++b) {
    auto& pool = members[b];
    shuffle(std::span(pool), rng);
    const double offset = uniform01(rng);
    for (std::size_t j = 0; j < pool.size(); ++j) {
      order.emplace_back((static_cast<double>(j) + offset) /
                             static_cast<double>(pool.size()),
                         b, pool[j]);
    }
  }
  std::sort(order.begin(), order.end());
  const std::size_t keep = retained_count(p, entity_total);

  std::vector<std::size_t> kept_per_bin(rarity_bins + 1, 0);
  std::vector<std::size_t> ids;
  for (std::size_t k = 0; k < keep; ++k) {
    ids.push_back(std::get<2>(order[k]));
    ++kept_per_bin[std::get<1>(order[k])];
  }
  ids.insert(ids.end(), members[0].begin(), members[0].end());

  std::vector<BinRate> bins = {{"O", members[0].size(), members[0].size(), 1.0}};
  for (std::size_t b = 1; b <= rarity_bins; ++b) {
    const std::size_t n = members[b].size();
    bins.push_back({"E/q" + std::to_string(b - 1), n, kept_per_bin[b],
                    n ? static_cast<double>(kept_per_bin[b]) / static_cast<double>(n)
                      : 0.0});
  }
  return finish(corpus, spec, std::move(ids), std::move(bins), cfg);
}

std::vector<SubsetManifest> build_density_family(
    const Corpus& corpus, const std::vector<double>& rates, std::uint64_t seed,
    const FeatureConfig& cfg, std::size_t rarity_bins) {
  std::vector<SubsetManifest> out;
  out.reserve(rates.size());
  for (double p : rates) {
    out.push_back(build_density_subset(corpus, p, seed, cfg, rarity_bins));
  }
  return out;
}

std::vector<std::size_t> rarity_bin_of(const Corpus& corpus,
                                       std::size_t rarity_bins) {
  std::map<std::string, std::size_t> freq;
  for (const auto& s : corpus.sentences()) {
    for (const auto& span : s.spans()) ++freq[fold_case(span.surface)];
  }
  // (rarest entity frequency, id) for every entity-bearing sentence.
  std::vector<std::pair<std::size_t, std::size_t>> scored;
  for (const auto& s : corpus.sentences()) {
    if (!s.has_entities()) continue;
    std::size_t rarest = SIZE_MAX;
    for (const auto& span : s.spans()) {
      rarest = std::min(rarest, freq[fold_case(span.surface)]);
    }
    scored.emplace_back(rarest, s.id());
  }
  std::sort(scored.begin(), scored.end());
  std::vector<std::size_t> bin(corpus.size(), 0);
  const std::size_t n = scored.size();
  for (std::size_t rank = 0; rank < n; ++rank) {
    bin[scored[rank].second] = 1 + rank * rarity_bins / n;
  }
  return bin;
}

std::vector<SubsetManifest> build_stratified_subsets(
    const Corpus& corpus, const SubsetSpec& spec, const FeatureConfig& cfg) {
  spec.validate();
  if (spec.strategy != SubsetStrategy::kStratified) {
    throw UsageError("build_stratified_subsets needs strategy=stratified");
  }
  const auto bin_of = rarity_bin_of(corpus, spec.rarity_bins);
  std::vector<std::vector<std::size_t>> members(spec.rarity_bins + 1);
  for (std::size_t id = 0; id < bin_of.size(); ++id) {
    members[bin_of[id]].push_back(id);
  }
  if (std::all_of(members.begin() + 1, members.end(),
                  [](const auto& m) { return m.empty(); })) {
    throw DataError("corpus has no entity-bearing sentences");
  }

  std::vector<std::string> bin_names = {"O"};
  for (std::size_t b = 1; b <= spec.rarity_bins; ++b) {
    bin_names.push_back("E/q" + std::to_string(b - 1));
  }

  // Design dimensions: D_O rate, then either one shared D_E rate or one rate
  // per rarity bin.
  const std::size_t dims = spec.rarity_control ? 2 : 1 + spec.rarity_bins;
  SobolSequence design(dims);
  Rng shift_rng(derive_seed(spec.seed, "resample/stratified/shift"));
  std::vector<double> shift(dims);
  for (auto& s : shift) s = uniform01(shift_rng);

  std::vector<SubsetManifest> out;
  out.reserve(spec.count);
  std::vector<double> u(dims);
  for (std::size_t j = 0; j < spec.count; ++j) {
    SubsetManifest manifest;
    for (std::size_t attempt = 0;; ++attempt) {
      design.next(u);
      std::vector<double> rates(spec.rarity_bins + 1);
      for (std::size_t d = 0; d < dims; ++d) {
        const double v = std::fmod(u[d] + shift[d], 1.0);
        const double rate = kMinRate + (1.0 - kMinRate) * v;
        if (d == 0) {
          rates[0] = rate;
        } else if (spec.rarity_control) {
          std::fill(rates.begin() + 1, rates.end(), rate);
        } else {
          rates[d] = rate;
        }
      }

      SubsetSpec child = spec;
      child.seed = derive_seed(spec.seed, "resample/stratified", j);
      if (attempt > 0) child.seed = derive_seed(child.seed, "redraw", attempt);
      Rng rng(child.seed);
      std::vector<std::size_t> ids;
      std::vector<BinRate> bins;
      for (std::size_t b = 0; b < members.size(); ++b) {
        std::vector<std::size_t> pool = members[b];
        shuffle(std::span(pool), rng);
        const std::size_t keep = retained_count(rates[b], pool.size());
        ids.insert(ids.end(), pool.begin(), pool.begin() + keep);
        bins.push_back({bin_names[b], pool.size(), keep, rates[b]});
      }
      if (ids.empty()) continue;
      manifest = finish(corpus, child, std::move(ids), std::move(bins), cfg);
      const bool duplicate =
          std::any_of(out.begin(), out.end(), [&](const SubsetManifest& m) {
            return m.sentence_ids == manifest.sentence_ids;
          });
      if (!duplicate || attempt + 1 >= kMaxRedraws) break;
    }
    out.push_back(std::move(manifest));
  }
  return out;
}

Corpus materialize(const Corpus& corpus, const SubsetManifest& manifest) {
  std::vector<Sentence> picked;
  picked.reserve(manifest.sentence_ids.size());
  std::size_t prev = 0;
  for (std::size_t k = 0; k < manifest.sentence_ids.size(); ++k) {
    const std::size_t id = manifest.sentence_ids[k];
    if (id >= corpus.size()) {
      throw DataError("manifest sentence id " + std::to_string(id) +
                      " is outside the corpus");
    }
    if (k > 0 && id <= prev) {
      throw DataError("manifest sentence ids must be sorted and unique");
    }
    prev = id;
    picked.push_back(corpus[id]);
  }
  if (picked.empty()) throw DataError("manifest selects no sentences");
  return Corpus::from_sentences(picked, corpus.source_path());
}

void verify_manifest(const Corpus& corpus, const SubsetManifest& manifest,
                     const FeatureConfig& cfg, double tolerance) {
  const auto recomputed = compute_features(materialize(corpus, manifest), cfg);
  const auto a = recomputed.as_array();
  const auto b = manifest.features.as_array();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(std::abs(a[i] - b[i]) <= tolerance)) {
      throw DataError("manifest feature " + std::string(kFeatureNames[i]) +
                      " does not match the recomputed value");
    }
  }
}

}  // namespace idkit
