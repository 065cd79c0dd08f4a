#include "idkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "idkit/error.hpp"

namespace idkit {

namespace {

std::string fold_case(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

double shannon_nats(const std::vector<std::size_t>& counts) {
  std::size_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) return 0.0;
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  return h;
}

std::size_t universe_size(const Corpus& corpus, const FeatureConfig& cfg) {
  if (cfg.category_universe.empty()) return corpus.categories().size();
  std::set<std::string> u(cfg.category_universe.begin(),
                          cfg.category_universe.end());
  for (const auto& c : corpus.categories()) {
    if (!u.count(c)) {
      throw DataError("category '" + c + "' is not in the category universe");
    }
  }
  return u.size();
}

}  // namespace

void FeatureConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw DataError("lambda must be a finite value >= 0");
  }
}

void FeatureConfig::load_vocab() {
  if (wordpiece_vocab_path) {
    vocab = std::make_shared<const WordPieceVocab>(
        WordPieceVocab::load(*wordpiece_vocab_path));
  }
}

std::size_t feature_index(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureNames.size(); ++i) {
    if (kFeatureNames[i] == name) return i;
  }
  throw UsageError("unknown feature '" + std::string(name) + "'");
}

FeatureVector FeatureVector::from_array(std::span<const double> v) {
  if (v.size() != kFeatureCount) {
    throw DataError("feature vector needs 6 values");
  }
  return FeatureVector{v[0], v[1], v[2], v[3], v[4], v[5]};
}

void FeatureVector::validate() const {
  const auto v = as_array();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw DataError(std::string(kFeatureNames[i]) + " is not finite");
    }
  }
  auto require = [](bool ok, std::string_view name) {
    if (!ok) throw DataError(std::string(name) + " is out of range");
  };
  require(ned >= 0, "ned");
  require(norm_std >= 0 && norm_std <= 1 + 1e-12, "norm_std");
  require(redundancy >= 0 && redundancy < 1, "redundancy");
  require(ele >= 0 && ele <= 1 + 1e-12, "ele");
  require(ssr >= 1, "ssr");
  require(vocab_entropy >= 0, "vocab_entropy");
}

NedCounts count_ned(std::span<const Sentence> sentences) {
  NedCounts c;
  for (const auto& s : sentences) {
    c.total_tokens += s.size();
    c.entity_tokens += s.entity_token_count();
    if (s.has_entities()) c.entity_sentence_tokens += s.size();
  }
  return c;
}

double ned_from_counts(const NedCounts& c, const FeatureConfig& cfg) {
  if (c.total_tokens == 0) throw DataError("density of an empty token set");
  if (c.entity_tokens == 0) return 0.0;
  const double ratio = static_cast<double>(c.entity_tokens) /
                       static_cast<double>(c.total_tokens);
  const double arg =
      cfg.ned_variant == NedVariant::kEq1
          ? static_cast<double>(c.entity_sentence_tokens)
          : static_cast<double>(c.total_tokens) /
                static_cast<double>(c.entity_sentence_tokens);
  const double lg =
      cfg.log_base == LogBase::kNatural ? std::log(arg) : std::log2(arg);
  return ratio * (1.0 + lg * cfg.lambda);
}

double compute_ned(std::span<const Sentence> sentences,
                   const FeatureConfig& cfg) {
  if (sentences.empty()) throw DataError("density of an empty sentence list");
  return ned_from_counts(count_ned(sentences), cfg);
}

double compute_ned(const Corpus& corpus, const FeatureConfig& cfg) {
  return compute_ned(corpus.sentences(), cfg);
}

double norm_std_from_counts(std::span<const std::size_t> counts) {
  const std::size_t c = counts.size();
  std::size_t total = 0;
  for (auto n : counts) total += n;
  if (c <= 1 || total == 0) return 0.0;
  const double inv_c = 1.0 / static_cast<double>(c);
  double ss = 0.0;
  for (auto n : counts) {
    const double d = static_cast<double>(n) / static_cast<double>(total) - inv_c;
    ss += d * d;
  }
  const double sigma = std::sqrt(ss * inv_c);
  const double value =
      sigma * static_cast<double>(c) / std::sqrt(static_cast<double>(c - 1));
  return std::min(value, 1.0);
}

double compute_norm_std(const Corpus& corpus, const FeatureConfig& cfg) {
  std::map<std::string, std::size_t> counts;
  for (const auto& c : cfg.category_universe) counts[c] = 0;
  for (const auto& c : corpus.categories()) counts[c] = 0;
  for (const auto& s : corpus.sentences()) {
    for (const auto& span : s.spans()) ++counts[span.category];
  }
  universe_size(corpus, cfg);  // rejects categories outside the universe
  std::vector<std::size_t> v;
  v.reserve(counts.size());
  for (const auto& [_, n] : counts) v.push_back(n);
  return norm_std_from_counts(v);
}

double compute_redundancy(const Corpus& corpus) {
  if (corpus.empty()) return 0.0;
  std::set<std::vector<Token>> distinct;
  for (const auto& s : corpus.sentences()) {
    distinct.emplace(s.tokens().begin(), s.tokens().end());
  }
  return 1.0 - static_cast<double>(distinct.size()) /
                   static_cast<double>(corpus.size());
}

double compute_ele(const Corpus& corpus, const FeatureConfig& cfg) {
  const std::size_t c = universe_size(corpus, cfg);
  if (c < 2) return 0.0;
  std::map<std::string, std::map<std::string, std::size_t>> by_entity;
  for (const auto& s : corpus.sentences()) {
    for (const auto& span : s.spans()) {
      auto key = cfg.ele_case_sensitive ? span.surface : fold_case(span.surface);
      ++by_entity[std::move(key)][span.category];
    }
  }
  if (by_entity.empty()) return 0.0;
  const double log_c = std::log(static_cast<double>(c));
  double sum = 0.0;
  for (const auto& [_, cats] : by_entity) {
    std::vector<std::size_t> counts;
    counts.reserve(cats.size());
    for (const auto& [__, n] : cats) counts.push_back(n);
    sum += shannon_nats(counts) / log_c;
  }
  return sum / static_cast<double>(by_entity.size());
}

double compute_ssr(const Corpus& corpus, const FeatureConfig& cfg) {
  std::size_t pieces = 0;
  std::size_t tokens = 0;
  std::unordered_map<std::string_view, std::size_t> memo;
  for (const auto& s : corpus.sentences()) {
    for (const auto& tok : s.tokens()) {
      ++tokens;
      auto it = memo.find(tok.text);
      if (it == memo.end()) {
        const std::size_t k = cfg.vocab ? cfg.vocab->piece_count(tok.text)
                                        : heuristic_pieces(tok.text).size();
        it = memo.emplace(tok.text, std::max<std::size_t>(k, 1)).first;
      }
      pieces += it->second;
    }
  }
  if (tokens == 0) return 1.0;
  return static_cast<double>(pieces) / static_cast<double>(tokens);
}

double compute_vocab_entropy(const Corpus& corpus) {
  std::map<std::string_view, std::size_t> freq;
  for (const auto& s : corpus.sentences()) {
    for (const auto& tok : s.tokens()) ++freq[tok.text];
  }
  std::vector<std::size_t> counts;
  counts.reserve(freq.size());
  for (const auto& [_, n] : freq) counts.push_back(n);
  return shannon_nats(counts) / std::log(2.0);
}

FeatureVector compute_features(const Corpus& corpus, const FeatureConfig& cfg) {
  cfg.validate();
  FeatureVector fv;
  fv.ned = compute_ned(corpus, cfg);
  fv.norm_std = compute_norm_std(corpus, cfg);
  fv.redundancy = compute_redundancy(corpus);
  fv.ele = compute_ele(corpus, cfg);
  fv.ssr = compute_ssr(corpus, cfg);
  fv.vocab_entropy = compute_vocab_entropy(corpus);
  return fv;
}

double o_label_proportion(const Corpus& corpus) {
  const auto counts = count_ned(corpus.sentences());
  if (counts.total_tokens == 0) throw DataError("empty corpus");
  return static_cast<double>(counts.total_tokens - counts.entity_tokens) /
         static_cast<double>(counts.total_tokens);
}

ScoreReport ScoreReport::from_counts(std::size_t tp, std::size_t fp,
                                     std::size_t fn) {
  ScoreReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.precision_undefined = tp + fp == 0;
  r.recall_undefined = tp + fn == 0;
  r.precision = r.precision_undefined
                    ? 0.0
                    : static_cast<double>(tp) / static_cast<double>(tp + fp);
  r.recall = r.recall_undefined
                 ? 0.0
                 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  // 2PR / (P + R) in count form, which avoids a rounding step.
  r.f1 = tp == 0 ? 0.0
                 : 2.0 * static_cast<double>(tp) /
                       static_cast<double>(2 * tp + fp + fn);
  r.missed_rate = r.recall_undefined
                      ? 0.0
                      : static_cast<double>(fn) / static_cast<double>(tp + fn);
  return r;
}

ScoreReport score_spans(const Corpus& gold, const Corpus& predicted) {
  const std::size_t n = std::min(gold.size(), predicted.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (gold[i].size() != predicted[i].size()) {
      throw DataError("sentence " + std::to_string(i) + ": gold has " +
                      std::to_string(gold[i].size()) +
                      " tokens, prediction has " +
                      std::to_string(predicted[i].size()));
    }
  }
  if (gold.size() != predicted.size()) {
    throw DataError("sentence " + std::to_string(n) + ": present in " +
                    (gold.size() > n ? "gold" : "prediction") + " only (" +
                    std::to_string(gold.size()) + " vs " +
                    std::to_string(predicted.size()) + " sentences)");
  }
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& g = gold[i].spans();
    const auto& p = predicted[i].spans();
    std::size_t matched = 0;
    for (const auto& ps : p) {
      const bool hit = std::any_of(g.begin(), g.end(), [&](const auto& gs) {
        return gs.start == ps.start && gs.end == ps.end &&
               gs.category == ps.category;
      });
      matched += hit ? 1 : 0;
    }
    tp += matched;
    fp += p.size() - matched;
    fn += g.size() - matched;
  }
  return ScoreReport::from_counts(tp, fp, fn);
}

}  // namespace idkit
