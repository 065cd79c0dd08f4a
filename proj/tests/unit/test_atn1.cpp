#include <gtest/gtest.h>

#include <cstdio>
#include <sstream>

#include "idkit/atn1.hpp"
#include "idkit/error.hpp"
#include "support/synth.hpp"

namespace idkit {
namespace {

std::string encode(const std::vector<AttentionTensor>& ts) {
  std::ostringstream os;
  write_attention(os, ts);
  return os.str();
}

std::size_t offset_of(const std::string& bytes) {
  std::istringstream is(bytes);
  try {
    read_attention(is);
  } catch (const FormatError& e) {
    return e.offset();
  }
  ADD_FAILURE() << "no FormatError";
  return 0;
}

TEST(Atn1, RoundTrip) {
  Rng rng(1);
  auto a = testing::random_attention(rng, 2, 3, 7);
  a.meta = {"conll03", "s-12", "bert-base-cased", {{"layer_norm", "true"}}};
  auto b = testing::random_attention(rng, 1, 1, 2);
  const std::string bytes = encode({a, b});
  std::istringstream is(bytes);
  const auto back = read_attention(is);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].layers, 2u);
  EXPECT_EQ(back[0].heads, 3u);
  EXPECT_EQ(back[0].seq_len, 7u);
  EXPECT_EQ(back[0].meta, a.meta);
  ASSERT_EQ(back[0].weights.size(), a.weights.size());
  for (std::size_t i = 0; i < a.weights.size(); ++i) {
    EXPECT_NEAR(back[0].weights[i], a.weights[i], 1e-7);
  }
  EXPECT_EQ(back[1], b);
}

TEST(Atn1, FileRoundTrip) {
  const std::string path = ::testing::TempDir() + "atn1_roundtrip.atn";
  const auto t = testing::identity_attention(1, 2, 4);
  write_attention_file(path, {t});
  const auto back = read_attention_file(path);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].weights, t.weights);
  std::remove(path.c_str());
  EXPECT_THROW(read_attention_file(path), DataError);
}

TEST(Atn1, LayoutIsLittleEndian) {
  const std::string bytes = encode({testing::identity_attention(1, 1, 2)});
  EXPECT_EQ(bytes.substr(0, 4), "ATN1");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 0);
  const std::size_t hlen = static_cast<unsigned char>(bytes[6]) |
                           static_cast<unsigned char>(bytes[7]) << 8;
  EXPECT_EQ(bytes.size(), 10 + hlen + 4 * 4);
  // 1.0f is 0x3F800000.
  const std::string first = bytes.substr(10 + hlen, 4);
  EXPECT_EQ(first, std::string("\x00\x00\x80\x3F", 4));
}

TEST(Atn1, EmptyStreamIsEmpty) {
  std::istringstream is("");
  EXPECT_TRUE(read_attention(is).empty());
}

TEST(Atn1, BadMagicReportsOffset) {
  std::string bytes = encode({testing::uniform_attention(1, 1, 3)});
  const std::size_t second = bytes.size();
  bytes += bytes;
  bytes[second + 2] = 'X';
  EXPECT_EQ(offset_of(bytes), second);
}

TEST(Atn1, BadVersionReportsOffset) {
  std::string bytes = encode({testing::uniform_attention(1, 1, 3)});
  bytes[4] = 2;
  EXPECT_EQ(offset_of(bytes), 4u);
}

TEST(Atn1, TruncationReportsOffset) {
  const std::string bytes = encode({testing::uniform_attention(1, 1, 3)});
  EXPECT_EQ(offset_of(bytes.substr(0, 3)), 0u);
  EXPECT_EQ(offset_of(bytes.substr(0, 8)), 6u);
  const std::size_t payload = bytes.size() - 9 * 4;
  EXPECT_EQ(offset_of(bytes.substr(0, bytes.size() - 1)), payload);
}

TEST(Atn1, BadHeaderAndContents) {
  std::string bytes = encode({testing::uniform_attention(1, 1, 3)});
  bytes[10] = '[';
  EXPECT_EQ(offset_of(bytes), 10u);

  auto t = testing::uniform_attention(1, 1, 3);
  std::string good = encode({t});
  // Overwrite the first weight with 0.5f so row 0 no longer sums to 1.
  const std::size_t payload = good.size() - 9 * 4;
  good.replace(payload, 4, std::string("\x00\x00\x00\x3F", 4));
  EXPECT_EQ(offset_of(good), 0u);
}

TEST(Atn1, WriterRejectsInvalidTensors) {
  std::ostringstream os;
  EXPECT_THROW(write_attention(os, {AttentionTensor(1, 1, 3)}), DataError);
}

}  // namespace
}  // namespace idkit
