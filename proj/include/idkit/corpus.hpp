#pragma once

#include <compare>
#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace idkit {

// One token with its BIO tag ("O", "B-<cat>", "I-<cat>").
struct Token {
  std::string text;
  std::string label;

  auto operator<=>(const Token&) const = default;
};

bool is_valid_label(std::string_view label);
bool is_outside(std::string_view label);
// Category of a B-/I- label; empty for "O".
std::string_view label_category(std::string_view label);

// Half-open token range [start, end) of one entity mention.
struct EntitySpan {
  std::size_t sentence_id = 0;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string category;
  std::string surface;

  std::size_t length() const { return end - start; }
  bool operator==(const EntitySpan&) const = default;
};

// Maximal B-/I- runs of one category, sorted by start. Tokens must already be
// BIO-valid.
std::vector<EntitySpan> extract_spans(std::span<const Token> tokens,
                                      std::size_t sentence_id = 0);

// Labels reconstructed from spans over a sentence of `length` tokens.
std::vector<std::string> labels_from_spans(std::span<const EntitySpan> spans,
                                           std::size_t length);

// Index of the first BIO violation (an I-X not continuing an X run), or
// npos when the sequence is valid.
std::size_t first_bio_violation(std::span<const Token> tokens);

// Rewrites every orphan I-X to B-X; returns the number of rewrites.
std::size_t coerce_bio(std::vector<Token>& tokens);

// A non-empty, BIO-valid token sequence. Immutable after construction.
class Sentence {
 public:
  // Throws DataError when tokens are empty, malformed, or BIO-invalid.
  Sentence(std::size_t id, std::vector<Token> tokens);

  std::size_t id() const { return id_; }
  std::span<const Token> tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<EntitySpan>& spans() const { return spans_; }
  std::size_t entity_token_count() const { return entity_tokens_; }
  bool has_entities() const { return entity_tokens_ > 0; }

  // Equal token texts and labels; ids are ignored.
  bool same_content(const Sentence& other) const {
    return tokens_ == other.tokens_;
  }
  bool operator==(const Sentence& other) const {
    return id_ == other.id_ && tokens_ == other.tokens_;
  }

 private:
  std::size_t id_;
  std::vector<Token> tokens_;
  std::vector<EntitySpan> spans_;
  std::size_t entity_tokens_ = 0;
};

// Ordered collection of sentences with ids 0..n-1.
class Corpus {
 public:
  Corpus() = default;
  // Assigns contiguous ids in the given order.
  explicit Corpus(std::vector<std::vector<Token>> sentences,
                  std::string source_path = {});
  // Re-ids the given sentences contiguously.
  static Corpus from_sentences(std::span<const Sentence> sentences,
                               std::string source_path = {});

  std::span<const Sentence> sentences() const { return sentences_; }
  const Sentence& operator[](std::size_t i) const { return sentences_[i]; }
  std::size_t size() const { return sentences_.size(); }
  bool empty() const { return sentences_.empty(); }
  const std::vector<std::string>& categories() const { return categories_; }
  const std::string& source_path() const { return source_path_; }
  std::size_t token_count() const;
  std::size_t span_count() const;

  // Structural equality: same sentences in the same order.
  bool operator==(const Corpus& other) const {
    return sentences_ == other.sentences_;
  }

 private:
  std::vector<Sentence> sentences_;
  std::vector<std::string> categories_;
  std::string source_path_;
};

enum class RepairPolicy { kStrict, kCoerce };

struct ParseResult {
  Corpus corpus;
  std::size_t repairs = 0;
};

// One "token<ws>label" per line, blank line between sentences, "-DOCSTART-"
// lines skipped, CRLF tolerated. The last field is the label; extra leading
// fields are joined with '_' into the token text.
ParseResult parse_conll(std::istream& in,
                        RepairPolicy policy = RepairPolicy::kCoerce,
                        std::string source_path = {});
ParseResult parse_conll_string(std::string_view text,
                               RepairPolicy policy = RepairPolicy::kCoerce);
ParseResult read_conll_file(const std::string& path,
                            RepairPolicy policy = RepairPolicy::kCoerce);

// Throws DataError on an empty corpus and Error on stream failure.
void write_conll(const Corpus& corpus, std::ostream& out);
std::string to_conll_string(const Corpus& corpus);
void write_conll_file(const Corpus& corpus, const std::string& path);

}  // namespace idkit
