#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "idkit/asa.hpp"
#include "idkit/corpus.hpp"
#include "idkit/random.hpp"

namespace idkit::testing {

struct SynthOptions {
  std::size_t sentences = 600;
  std::size_t categories = 5;
  double entity_sentence_share = 0.45;
  std::size_t min_length = 4;
  std::size_t max_length = 18;
  std::size_t vocabulary = 400;
  std::size_t entities_per_category = 40;
  // Share of entity surfaces that are also annotated with a second category.
  double polysemy = 0.1;
  std::uint64_t seed = 1;
};

// Seeded random corpus with Zipf-like word frequencies, multi-token entities
// from per-category pools, and some cross-category entity surfaces.
Corpus synthetic_corpus(const SynthOptions& opts);

// Token list from "word/LABEL" pairs separated by spaces; a bare word is O.
std::vector<Token> tokens(const std::string& spec);

// Corpus from one tokens() spec per sentence.
Corpus corpus_of(const std::vector<std::string>& specs);

// Softmax over random normal logits for every row.
AttentionTensor random_attention(Rng& rng, std::size_t layers, std::size_t heads,
                                 std::size_t seq_len);

// softmax(tau * logits) row by row; logits is row-major L x L.
AttentionTensor tempered_attention(const std::vector<double>& logits,
                                   std::size_t seq_len, double tau);

AttentionTensor uniform_attention(std::size_t layers, std::size_t heads,
                                  std::size_t seq_len);
AttentionTensor identity_attention(std::size_t layers, std::size_t heads,
                                   std::size_t seq_len);

}  // namespace idkit::testing
