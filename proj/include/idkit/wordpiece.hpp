#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace idkit {

// Greedy longest-match-first WordPiece segmentation against a fixed
// vocabulary. Continuation pieces carry the "##" prefix.
class WordPieceVocab {
 public:
  WordPieceVocab() = default;
  explicit WordPieceVocab(std::vector<std::string> pieces);
  // One piece per line (BERT vocab.txt layout).
  static WordPieceVocab load(const std::string& path);

  bool contains(std::string_view piece) const;
  std::size_t size() const { return pieces_.size(); }

  // Pieces for one word; a word that cannot be fully covered, or is longer
  // than max_chars code points, yields the single piece "[UNK]".
  std::vector<std::string> segment(std::string_view word,
                                   std::size_t max_chars = 100) const;
  // Number of pieces; unknown words count as one.
  std::size_t piece_count(std::string_view word) const;

 private:
  std::unordered_set<std::string> pieces_;
};

// Vocabulary-free approximation: split at letter/digit/punctuation class
// boundaries, then cut alphabetic runs into chunks of `chunk` code points.
// Non-ASCII code points count as letters.
std::vector<std::string> heuristic_pieces(std::string_view word,
                                          std::size_t chunk = 8);

// Byte offsets of UTF-8 code point starts in `s`, plus s.size().
std::vector<std::size_t> utf8_boundaries(std::string_view s);

}  // namespace idkit
