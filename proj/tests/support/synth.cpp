#include "support/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace idkit::testing {
namespace {

const char* kCategories[] = {"person",  "location", "organization", "product",
                             "event",   "group",    "creative",     "facility"};

std::string word_for(std::size_t i) {
  static const char* kSyllables[] = {"ka", "lo", "mi", "ne", "ru", "sa", "ti",
                                     "vo", "de", "fa", "go", "hu"};
  std::string w;
  std::size_t x = i + 1;
  while (x > 0) {
    w += kSyllables[x % 12];
    x /= 12;
  }
  if (i % 7 == 3) w += "ing";
  return w;
}

double normal(Rng& rng) {
  // Box-Muller on the portable uniform source.
  const double u1 = std::max(uniform01(rng), 1e-300);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

Corpus synthetic_corpus(const SynthOptions& opts) {
  Rng rng(opts.seed);
  const std::size_t cats = std::min<std::size_t>(opts.categories, 8);

  // Zipf weights over the vocabulary, sampled through the cumulative table.
  std::vector<double> cdf(opts.vocabulary);
  double total = 0;
  for (std::size_t i = 0; i < opts.vocabulary; ++i) {
    total += 1.0 / static_cast<double>(i + 1);
    cdf[i] = total;
  }
  auto draw_word = [&]() {
    const double u = uniform01(rng) * total;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    return word_for(static_cast<std::size_t>(it - cdf.begin()));
  };

  struct Entity {
    std::vector<std::string> words;
    std::vector<std::size_t> categories;
  };
  std::vector<Entity> pool;
  for (std::size_t c = 0; c < cats; ++c) {
    for (std::size_t e = 0; e < opts.entities_per_category; ++e) {
      Entity ent;
      const std::size_t len = 1 + uniform_index(rng, 3);
      for (std::size_t k = 0; k < len; ++k) {
        std::string w = word_for(1000 + c * 97 + e * 5 + k);
        w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
        ent.words.push_back(w);
      }
      ent.categories.push_back(c);
      if (uniform01(rng) < opts.polysemy) {
        ent.categories.push_back((c + 1 + uniform_index(rng, cats - 1)) % cats);
      }
      pool.push_back(std::move(ent));
    }
  }
  // Rank-skewed entity popularity so rarity bins are meaningful.
  std::vector<double> ecdf(pool.size());
  double etotal = 0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    etotal += 1.0 / std::sqrt(static_cast<double>(i + 1));
    ecdf[i] = etotal;
  }
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  shuffle(std::span<std::size_t>(order), rng);

  std::vector<std::vector<Token>> sentences;
  for (std::size_t s = 0; s < opts.sentences; ++s) {
    const std::size_t len =
        opts.min_length + uniform_index(rng, opts.max_length - opts.min_length + 1);
    std::vector<Token> toks;
    const bool with_entities = uniform01(rng) < opts.entity_sentence_share;
    const std::size_t n_ent = with_entities ? 1 + uniform_index(rng, 3) : 0;
    std::vector<std::size_t> slots;
    for (std::size_t k = 0; k < n_ent; ++k) slots.push_back(uniform_index(rng, len));
    std::sort(slots.begin(), slots.end());
    std::size_t next = 0;
    for (std::size_t i = 0; i < len; ++i) {
      while (next < slots.size() && slots[next] == i) {
        const double u = uniform01(rng) * etotal;
        const auto idx = static_cast<std::size_t>(
            std::lower_bound(ecdf.begin(), ecdf.end(), u) - ecdf.begin());
        const auto& ent = pool[order[std::min(idx, pool.size() - 1)]];
        const auto cat = ent.categories[uniform_index(rng, ent.categories.size())];
        for (std::size_t k = 0; k < ent.words.size(); ++k) {
          toks.push_back({ent.words[k], (k == 0 ? "B-" : "I-") +
                                            std::string(kCategories[cat])});
        }
        // A separator keeps adjacent mentions from fusing into one span.
        toks.push_back({draw_word(), "O"});
        ++next;
      }
      toks.push_back({draw_word(), "O"});
    }
    sentences.push_back(std::move(toks));
  }
  return Corpus(std::move(sentences), "synthetic");
}

std::vector<Token> tokens(const std::string& spec) {
  std::vector<Token> out;
  std::istringstream in(spec);
  std::string item;
  while (in >> item) {
    const auto slash = item.rfind('/');
    if (slash == std::string::npos || slash == 0) {
      out.push_back({item, "O"});
    } else {
      out.push_back({item.substr(0, slash), item.substr(slash + 1)});
    }
  }
  return out;
}

Corpus corpus_of(const std::vector<std::string>& specs) {
  std::vector<std::vector<Token>> sentences;
  for (const auto& s : specs) sentences.push_back(tokens(s));
  return Corpus(std::move(sentences));
}

AttentionTensor random_attention(Rng& rng, std::size_t layers, std::size_t heads,
                                 std::size_t seq_len) {
  AttentionTensor t(layers, heads, seq_len);
  for (std::size_t l = 0; l < layers; ++l) {
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t q = 0; q < seq_len; ++q) {
        auto row = t.row(l, h, q);
        std::vector<double> z(seq_len);
        double mx = -1e300;
        for (auto& v : z) {
          v = 2.0 * normal(rng);
          mx = std::max(mx, v);
        }
        double sum = 0;
        for (auto& v : z) sum += (v = std::exp(v - mx));
        for (std::size_t k = 0; k < seq_len; ++k) row[k] = static_cast<float>(z[k] / sum);
      }
    }
  }
  return t;
}

AttentionTensor tempered_attention(const std::vector<double>& logits,
                                   std::size_t seq_len, double tau) {
  AttentionTensor t(1, 1, seq_len);
  for (std::size_t q = 0; q < seq_len; ++q) {
    auto row = t.row(0, 0, q);
    double mx = -1e300;
    for (std::size_t k = 0; k < seq_len; ++k) mx = std::max(mx, tau * logits[q * seq_len + k]);
    std::vector<double> z(seq_len);
    double sum = 0;
    for (std::size_t k = 0; k < seq_len; ++k) {
      sum += (z[k] = std::exp(tau * logits[q * seq_len + k] - mx));
    }
    for (std::size_t k = 0; k < seq_len; ++k) row[k] = static_cast<float>(z[k] / sum);
  }
  return t;
}

AttentionTensor uniform_attention(std::size_t layers, std::size_t heads,
                                  std::size_t seq_len) {
  AttentionTensor t(layers, heads, seq_len);
  std::fill(t.weights.begin(), t.weights.end(), 1.0f / static_cast<float>(seq_len));
  return t;
}

AttentionTensor identity_attention(std::size_t layers, std::size_t heads,
                                   std::size_t seq_len) {
  AttentionTensor t(layers, heads, seq_len);
  for (std::size_t l = 0; l < layers; ++l) {
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t q = 0; q < seq_len; ++q) t.row(l, h, q)[q] = 1.0f;
    }
  }
  return t;
}

}  // namespace idkit::testing
