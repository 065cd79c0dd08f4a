#include "idkit/wordpiece.hpp"

#include <fstream>

#include "idkit/error.hpp"

namespace idkit {

std::vector<std::size_t> utf8_boundaries(std::string_view s) {
  std::vector<std::size_t> cuts;
  cuts.reserve(s.size() + 1);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto c = static_cast<unsigned char>(s[i]);
    if ((c & 0xC0) != 0x80) cuts.push_back(i);
  }
  cuts.push_back(s.size());
  return cuts;
}

WordPieceVocab::WordPieceVocab(std::vector<std::string> pieces)
    : pieces_(std::make_move_iterator(pieces.begin()),
              std::make_move_iterator(pieces.end())) {}

WordPieceVocab WordPieceVocab::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocabulary " + path);
  std::vector<std::string> pieces;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (!line.empty()) pieces.push_back(line);
  }
  if (pieces.empty()) throw DataError("vocabulary " + path + " is empty");
  return WordPieceVocab(std::move(pieces));
}

bool WordPieceVocab::contains(std::string_view piece) const {
  return pieces_.count(std::string(piece)) != 0;
}

std::vector<std::string> WordPieceVocab::segment(std::string_view word,
                                                 std::size_t max_chars) const {
  const auto cuts = utf8_boundaries(word);
  const std::size_t n = cuts.size() - 1;  // code points
  if (n == 0) return {};
  if (n > max_chars) return {"[UNK]"};

  std::vector<std::string> out;
  std::size_t start = 0;
  std::string candidate;
  while (start < n) {
    std::size_t end = n;
    bool found = false;
    while (start < end) {
      candidate.assign(start > 0 ? "##" : "");
      candidate.append(word.substr(cuts[start], cuts[end] - cuts[start]));
      if (pieces_.count(candidate)) {
        found = true;
        break;
      }
      --end;
    }
    if (!found) return {"[UNK]"};
    out.push_back(candidate);
    start = end;
  }
  return out;
}

std::size_t WordPieceVocab::piece_count(std::string_view word) const {
  return segment(word).size();
}

namespace {

enum class CharClass { kLetter, kDigit, kPunct };

CharClass classify(std::string_view cp) {
  const auto c = static_cast<unsigned char>(cp.front());
  if (c >= 0x80) return CharClass::kLetter;
  if (c >= '0' && c <= '9') return CharClass::kDigit;
  if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) {
    return CharClass::kLetter;
  }
  return CharClass::kPunct;
}

}  // namespace

std::vector<std::string> heuristic_pieces(std::string_view word,
                                          std::size_t chunk) {
  std::vector<std::string> out;
  const auto cuts = utf8_boundaries(word);
  const std::size_t n = cuts.size() - 1;
  std::size_t i = 0;
  while (i < n) {
    const CharClass cls =
        classify(word.substr(cuts[i], cuts[i + 1] - cuts[i]));
    std::size_t j = i + 1;
    while (j < n &&
           classify(word.substr(cuts[j], cuts[j + 1] - cuts[j])) == cls) {
      ++j;
    }
    if (cls == CharClass::kLetter && chunk > 0) {
      for (std::size_t k = i; k < j; k += chunk) {
        const std::size_t stop = std::min(j, k + chunk);
        out.emplace_back(word.substr(cuts[k], cuts[stop] - cuts[k]));
      }
    } else {
      out.emplace_back(word.substr(cuts[i], cuts[j] - cuts[i]));
    }
    i = j;
  }
  return out;
}

}  // namespace idkit
