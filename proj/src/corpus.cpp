#include "idkit/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "idkit/error.hpp"

namespace idkit {

namespace {

constexpr std::string_view kWhitespace = " \t\r\n\v\f";

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    pos = line.find_first_not_of(kWhitespace, pos);
    if (pos == std::string_view::npos) break;
    const std::size_t end = line.find_first_of(kWhitespace, pos);
    fields.push_back(line.substr(pos, end == std::string_view::npos
                                          ? std::string_view::npos
                                          : end - pos));
    if (end == std::string_view::npos) break;
    pos = end;
  }
  return fields;
}

bool has_whitespace(std::string_view s) {
  return s.find_first_of(kWhitespace) != std::string_view::npos;
}

}  // namespace

bool is_outside(std::string_view label) { return label == "O"; }

bool is_valid_label(std::string_view label) {
  if (label == "O") return true;
  return label.size() > 2 && (label[0] == 'B' || label[0] == 'I') &&
         label[1] == '-' && !has_whitespace(label);
}

std::string_view label_category(std::string_view label) {
  if (label.size() > 2 && label[1] == '-') return label.substr(2);
  return {};
}

std::size_t first_bio_violation(std::span<const Token> tokens) {
  std::string_view open;  // category of the run we are inside, if any
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string_view label = tokens[i].label;
    if (is_outside(label)) {
      open = {};
    } else if (label[0] == 'B') {
      open = label_category(label);
    } else {
      if (label_category(label) != open) return i;
    }
  }
  return std::string_view::npos;
}

std::size_t coerce_bio(std::vector<Token>& tokens) {
  std::size_t repairs = 0;
  std::string open;
  for (auto& tok : tokens) {
    if (is_outside(tok.label)) {
      open.clear();
    } else if (tok.label[0] == 'B') {
      open = label_category(tok.label);
    } else if (label_category(tok.label) != open) {
      tok.label[0] = 'B';
      open = label_category(tok.label);
      ++repairs;
    }
  }
  return repairs;
}

std::vector<EntitySpan> extract_spans(std::span<const Token> tokens,
                                      std::size_t sentence_id) {
  std::vector<EntitySpan> spans;
  for (std::size_t i = 0; i < tokens.size();) {
    if (is_outside(tokens[i].label)) {
      ++i;
      continue;
    }
    const std::string_view category = label_category(tokens[i].label);
    std::size_t end = i + 1;
    while (end < tokens.size() && tokens[end].label[0] == 'I' &&
           label_category(tokens[end].label) == category) {
      ++end;
    }
    EntitySpan span{sentence_id, i, end, std::string(category), {}};
    for (std::size_t k = i; k < end; ++k) {
      if (k > i) span.surface += ' ';
      span.surface += tokens[k].text;
    }
    spans.push_back(std::move(span));
    i = end;
  }
  return spans;
}

std::vector<std::string> labels_from_spans(std::span<const EntitySpan> spans,
                                           std::size_t length) {
  std::vector<std::string> labels(length, "O");
  for (const auto& s : spans) {
    for (std::size_t k = s.start; k < s.end && k < length; ++k) {
      labels[k] = (k == s.start ? "B-" : "I-") + s.category;
    }
  }
  return labels;
}

Sentence::Sentence(std::size_t id, std::vector<Token> tokens)
    : id_(id), tokens_(std::move(tokens)) {
  if (tokens_.empty()) {
    throw DataError("sentence " + std::to_string(id_) + " is empty");
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const auto& tok = tokens_[i];
    if (tok.text.empty() || has_whitespace(tok.text)) {
      throw DataError("sentence " + std::to_string(id_) + " token " +
                      std::to_string(i) + ": invalid token text");
    }
    if (!is_valid_label(tok.label)) {
      throw DataError("sentence " + std::to_string(id_) + " token " +
                      std::to_string(i) + ": invalid label '" + tok.label +
                      "'");
    }
    if (!is_outside(tok.label)) ++entity_tokens_;
  }
  if (const auto bad = first_bio_violation(tokens_);
      bad != std::string_view::npos) {
    throw DataError("sentence " + std::to_string(id_) + " token " +
                    std::to_string(bad) + ": " + tokens_[bad].label +
                    " does not continue an entity");
  }
  spans_ = extract_spans(tokens_, id_);
}

Corpus::Corpus(std::vector<std::vector<Token>> sentences,
               std::string source_path)
    : source_path_(std::move(source_path)) {
  sentences_.reserve(sentences.size());
  std::set<std::string> cats;
  for (auto& toks : sentences) {
    sentences_.emplace_back(sentences_.size(), std::move(toks));
    for (const auto& s : sentences_.back().spans()) cats.insert(s.category);
  }
  categories_.assign(cats.begin(), cats.end());
}

Corpus Corpus::from_sentences(std::span<const Sentence> sentences,
                              std::string source_path) {
  std::vector<std::vector<Token>> toks;
  toks.reserve(sentences.size());
  for (const auto& s : sentences) {
    toks.emplace_back(s.tokens().begin(), s.tokens().end());
  }
  return Corpus(std::move(toks), std::move(source_path));
}

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences_) n += s.size();
  return n;
}

std::size_t Corpus::span_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences_) n += s.spans().size();
  return n;
}

ParseResult parse_conll(std::istream& in, RepairPolicy policy,
                        std::string source_path) {
  std::vector<std::vector<Token>> sentences;
  std::vector<Token> current;
  std::size_t current_first_line = 0;
  std::size_t repairs = 0;

  auto flush = [&] {
    if (current.empty()) return;
    const auto bad = first_bio_violation(current);
    if (bad != std::string_view::npos) {
      if (policy == RepairPolicy::kStrict) {
        throw ParseError(current_first_line + bad,
                         "BIO violation: " + current[bad].label +
                             " does not continue an entity");
      }
      repairs += coerce_bio(current);
    }
    sentences.push_back(std::move(current));
    current.clear();
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto fields = split_fields(line);
    if (fields.empty()) {
      flush();
      continue;
    }
    if (fields.front() == "-DOCSTART-") {
      flush();
      continue;
    }
    if (fields.size() < 2) {
      throw ParseError(lineno, "expected 'token label', got " +
                                   std::to_string(fields.size()) + " field");
    }
    const std::string_view label = fields.back();
    if (!is_valid_label(label)) {
      throw ParseError(lineno, "invalid BIO label '" + std::string(label) +
                                   "'");
    }
    std::string text(fields.front());
    for (std::size_t i = 1; i + 1 < fields.size(); ++i) {
      text += '_';
      text += fields[i];
    }
    if (current.empty()) current_first_line = lineno;
    current.push_back(Token{std::move(text), std::string(label)});
  }
  if (in.bad()) throw Error("read failure");
  flush();
  if (sentences.empty()) throw DataError("empty corpus: no sentences found");
  return ParseResult{Corpus(std::move(sentences), std::move(source_path)),
                     repairs};
}

ParseResult parse_conll_string(std::string_view text, RepairPolicy policy) {
  std::istringstream in{std::string(text)};
  return parse_conll(in, policy);
}

ParseResult read_conll_file(const std::string& path, RepairPolicy policy) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return parse_conll(in, policy, path);
}

void write_conll(const Corpus& corpus, std::ostream& out) {
  if (corpus.empty()) throw DataError("refusing to write an empty corpus");
  for (const auto& sentence : corpus.sentences()) {
    for (const auto& tok : sentence.tokens()) {
      out << tok.text << '\t' << tok.label << '\n';
    }
    out << '\n';
  }
  if (!out) throw Error("write failure");
}

std::string to_conll_string(const Corpus& corpus) {
  std::ostringstream out;
  write_conll(corpus, out);
  return out.str();
}

void write_conll_file(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_conll(corpus, out);
}

}  // namespace idkit
