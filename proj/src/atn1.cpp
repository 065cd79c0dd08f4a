#include "idkit/atn1.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>

#include "idkit/error.hpp"

namespace idkit {

namespace {

constexpr char kMagic[4] = {'A', 'T', 'N', '1'};
constexpr std::uint32_t kMaxHeader = 1u << 20;

template <typename T>
void put_le(std::string& buf, T v) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(const unsigned char* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<T>(static_cast<T>(p[i]) << (8 * i));
  }
  return v;
}

nlohmann::ordered_json meta_to_json(const AttentionMeta& m) {
  nlohmann::ordered_json j = {{"corpus_id", m.corpus_id},
                              {"sentence_id", m.sentence_id},
                              {"model_name", m.model_name}};
  for (const auto& [k, v] : m.extra) {
    auto parsed = nlohmann::ordered_json::parse(v, nullptr, false);
    j[k] = parsed.is_discarded() ? nlohmann::ordered_json(v) : parsed;
  }
  return j;
}

AttentionMeta meta_from_json(const nlohmann::json& j) {
  AttentionMeta m;
  if (!j.is_object()) return m;
  for (const auto& [k, v] : j.items()) {
    const std::string text = v.is_string() ? v.get<std::string>() : v.dump();
    if (k == "corpus_id") {
      m.corpus_id = text;
    } else if (k == "sentence_id") {
      m.sentence_id = text;
    } else if (k == "model_name") {
      m.model_name = text;
    } else {
      m.extra[k] = v.dump();
    }
  }
  return m;
}

}  // namespace

void write_attention(std::ostream& out,
                     const std::vector<AttentionTensor>& tensors) {
  for (const auto& t : tensors) {
    t.validate();
    nlohmann::ordered_json header = {{"layers", t.layers},
                                     {"heads", t.heads},
                                     {"seq_len", t.seq_len},
                                     {"dtype", "f32"},
                                     {"meta", meta_to_json(t.meta)}};
    const std::string json = header.dump();
    std::string buf(kMagic, 4);
    put_le<std::uint16_t>(buf, kAtn1Version);
    put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(json.size()));
    buf += json;
    buf.reserve(buf.size() + t.weights.size() * 4);
    for (float v : t.weights) put_le<std::uint32_t>(buf, std::bit_cast<std::uint32_t>(v));
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw Error("write failure");
}

void write_attention_file(const std::string& path,
                          const std::vector<AttentionTensor>& tensors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_attention(out, tensors);
}

std::vector<AttentionTensor> read_attention(std::istream& in) {
  const std::string data((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
  std::vector<AttentionTensor> out;
  std::size_t pos = 0;
  auto need = [&](std::size_t n, const char* what) {
    if (data.size() - pos < n) {
      throw FormatError(pos, std::string("truncated ") + what);
    }
  };
  while (pos < data.size()) {
    const std::size_t record = pos;
    need(4, "magic");
    if (std::memcmp(bytes + pos, kMagic, 4) != 0) {
      throw FormatError(pos, "bad magic, expected \"ATN1\"");
    }
    pos += 4;
    need(2, "version");
    const auto version = get_le<std::uint16_t>(bytes + pos);
    if (version != kAtn1Version) {
      throw FormatError(pos, "unsupported version " + std::to_string(version));
    }
    pos += 2;
    need(4, "header length");
    const auto hlen = get_le<std::uint32_t>(bytes + pos);
    if (hlen > kMaxHeader) throw FormatError(pos, "header length too large");
    pos += 4;
    need(hlen, "header");
    const auto header =
        nlohmann::json::parse(data.begin() + static_cast<long>(pos),
                              data.begin() + static_cast<long>(pos + hlen),
                              nullptr, false);
    if (header.is_discarded() || !header.is_object()) {
      throw FormatError(pos, "header is not a JSON object");
    }
    AttentionTensor t;
    try {
      if (header.value("dtype", "") != "f32") {
        throw FormatError(pos, "dtype must be \"f32\"");
      }
      t.layers = header.at("layers").get<std::size_t>();
      t.heads = header.at("heads").get<std::size_t>();
      t.seq_len = header.at("seq_len").get<std::size_t>();
      t.meta = meta_from_json(header.value("meta", nlohmann::json::object()));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(pos, std::string("bad header: ") + e.what());
    }
    pos += hlen;
    const std::size_t count = t.layers * t.heads * t.seq_len * t.seq_len;
    if (t.seq_len != 0 && count / t.seq_len / t.seq_len != t.layers * t.heads) {
      throw FormatError(pos, "tensor shape overflows");
    }
    need(count * 4, "payload");
    t.weights.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      t.weights[i] = std::bit_cast<float>(get_le<std::uint32_t>(bytes + pos + 4 * i));
    }
    try {
      t.validate();
    } catch (const DataError& e) {
      throw FormatError(record, std::string("invalid tensor: ") + e.what());
    }
    pos += count * 4;
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<AttentionTensor> read_attention_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return read_attention(in);
}

}  // namespace idkit
