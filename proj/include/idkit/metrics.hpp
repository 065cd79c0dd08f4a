#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idkit/corpus.hpp"
#include "idkit/wordpiece.hpp"

namespace idkit {

// Which sentence-length correction multiplies ET/TT in the density score.
//   kEq1:      (1 + log(TT_SL) * lambda)
//   kRatioLog: (1 + log(TT / TT_SL) * lambda)
enum class NedVariant { kEq1, kRatioLog };
enum class LogBase { kNatural, kBase2 };

struct FeatureConfig {
  double lambda = 0.1;
  NedVariant ned_variant = NedVariant::kEq1;
  LogBase log_base = LogBase::kNatural;
  // Entity identity for polysemy: case-folded surface unless set.
  bool ele_case_sensitive = false;
  // Category set C for imbalance and polysemy normalization. Empty means the
  // categories observed in the corpus being measured.
  std::vector<std::string> category_universe;
  std::optional<std::string> wordpiece_vocab_path;
  // Loaded from wordpiece_vocab_path by load_vocab(); null selects the
  // heuristic splitter.
  std::shared_ptr<const WordPieceVocab> vocab;

  // Throws DataError if lambda < 0 or the vocabulary cannot be read.
  void validate() const;
  void load_vocab();
};

inline constexpr std::array<std::string_view, 6> kFeatureNames = {
    "ned", "norm_std", "redundancy", "ele", "ssr", "vocab_entropy"};
inline constexpr std::size_t kFeatureCount = kFeatureNames.size();

// Index into kFeatureNames; throws UsageError for unknown names.
std::size_t feature_index(std::string_view name);

struct FeatureVector {
  double ned = 0;
  double norm_std = 0;
  double redundancy = 0;
  double ele = 0;
  double ssr = 1;
  double vocab_entropy = 0;

  std::array<double, kFeatureCount> as_array() const {
    return {ned, norm_std, redundancy, ele, ssr, vocab_entropy};
  }
  static FeatureVector from_array(std::span<const double> values);
  double operator[](std::size_t i) const { return as_array()[i]; }
  // Throws DataError when a field is non-finite or out of its range.
  void validate() const;
  bool operator==(const FeatureVector&) const = default;
};

struct NedCounts {
  std::size_t entity_tokens = 0;     // ET
  std::size_t total_tokens = 0;      // TT
  std::size_t entity_sentence_tokens = 0;  // TT_SL
};

NedCounts count_ned(std::span<const Sentence> sentences);
double ned_from_counts(const NedCounts& counts, const FeatureConfig& cfg);
// Throws DataError for an empty sentence list.
double compute_ned(std::span<const Sentence> sentences,
                   const FeatureConfig& cfg);
double compute_ned(const Corpus& corpus, const FeatureConfig& cfg);

// sigma * C / sqrt(C - 1) over the proportions of `counts`; C = counts.size()
// including zero entries. 0 when C <= 1 or all counts are zero.
double norm_std_from_counts(std::span<const std::size_t> counts);
double compute_norm_std(const Corpus& corpus, const FeatureConfig& cfg = {});

double compute_redundancy(const Corpus& corpus);
double compute_ele(const Corpus& corpus, const FeatureConfig& cfg = {});
double compute_ssr(const Corpus& corpus, const FeatureConfig& cfg = {});
// Shannon entropy in bits of the token-text distribution.
double compute_vocab_entropy(const Corpus& corpus);

FeatureVector compute_features(const Corpus& corpus,
                               const FeatureConfig& cfg = {});

// Fraction of tokens labeled O.
double o_label_proportion(const Corpus& corpus);

struct ScoreReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double missed_rate = 0;
  // Set when the corresponding denominator was zero and the value defaulted
  // to 0.
  bool precision_undefined = false;
  bool recall_undefined = false;

  static ScoreReport from_counts(std::size_t tp, std::size_t fp,
                                 std::size_t fn);
};

// Exact-match span scoring: (sentence, start, end, category) must agree.
// Throws DataError naming the first sentence whose token count differs.
ScoreReport score_spans(const Corpus& gold, const Corpus& predicted);

}  // namespace idkit
