#include <gtest/gtest.h>

#include "idkit/corpus.hpp"
#include "idkit/error.hpp"
#include "support/synth.hpp"

namespace idkit {
namespace {

using testing::corpus_of;
using testing::tokens;

TEST(ParseConll, MinimalSentence) {
  const auto r = parse_conll_string("John B-person\nsmiled O\n\n");
  ASSERT_EQ(r.corpus.size(), 1u);
  const auto& spans = r.corpus[0].spans();
  ASSERT_EQ(spans.size(), 1u);
  EXPECT_EQ(spans[0], (EntitySpan{0, 0, 1, "person", "John"}));
  EXPECT_EQ(r.repairs, 0u);
}

TEST(ParseConll, CoercesLeadingInside) {
  const auto r = parse_conll_string("Paris I-loc\nrocks O\n", RepairPolicy::kCoerce);
  EXPECT_EQ(r.repairs, 1u);
  ASSERT_EQ(r.corpus[0].spans().size(), 1u);
  EXPECT_EQ(r.corpus[0].spans()[0].category, "loc");
  EXPECT_EQ(r.corpus[0].tokens()[0].label, "B-loc");
}

TEST(ParseConll, StrictRejectsWithLineNumber) {
  try {
    parse_conll_string("a O\nb O\n\nc O\nd I-per\n", RepairPolicy::kStrict);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
  }
}

TEST(ParseConll, ThreeSentenceFixture) {
  const auto r = parse_conll_string(
      "-DOCSTART- O\n\n"
      "The O\nEmpire B-loc\nState I-loc\nBuilding I-loc\nshines O\n\n"
      "nothing O\nhere O\n\r\n"
      "Ask O\nMary B-person\n");
  ASSERT_EQ(r.corpus.size(), 3u);
  const std::vector<EntitySpan> expected0 = {
      {0, 1, 4, "loc", "Empire State Building"}};
  EXPECT_EQ(r.corpus[0].spans(), expected0);
  EXPECT_TRUE(r.corpus[1].spans().empty());
  const std::vector<EntitySpan> expected2 = {{2, 1, 2, "person", "Mary"}};
  EXPECT_EQ(r.corpus[2].spans(), expected2);
  EXPECT_EQ(r.corpus.categories(), (std::vector<std::string>{"loc", "person"}));
}

TEST(ParseConll, ExtraColumnsJoinIntoToken) {
  const auto r = parse_conll_string("New York NNP B-loc\n");
  EXPECT_EQ(r.corpus[0].tokens()[0].text, "New_York_NNP");
}

TEST(ParseConll, MalformedLineCitesLine) {
  try {
    parse_conll_string("a O\nlonely\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_conll_string("a X-foo\n"), ParseError);
  EXPECT_THROW(parse_conll_string("a B-\n"), ParseError);
}

TEST(ParseConll, EmptyInputIsAnError) {
  EXPECT_THROW(parse_conll_string(""), DataError);
  EXPECT_THROW(parse_conll_string("\n\n-DOCSTART- O\n\n"), DataError);
}

TEST(ExtractSpans, Definitions) {
  EXPECT_TRUE(extract_spans(tokens("a b c")).empty());
  const auto spans = extract_spans(tokens("x/B-loc y/I-loc z w/B-per"));
  ASSERT_EQ(spans.size(), 2u);
  EXPECT_EQ(spans[0], (EntitySpan{0, 0, 2, "loc", "x y"}));
  EXPECT_EQ(spans[1], (EntitySpan{0, 3, 4, "per", "w"}));
  const auto esb = extract_spans(tokens("Empire/B-loc State/I-loc Building/I-loc"));
  ASSERT_EQ(esb.size(), 1u);
  EXPECT_EQ(esb[0].length(), 3u);
}

TEST(ExtractSpans, AdjacentBeginsStaySeparate) {
  const auto spans = extract_spans(tokens("a/B-loc b/B-loc c/B-per"));
  ASSERT_EQ(spans.size(), 3u);
  EXPECT_EQ(spans[1].start, 1u);
}

TEST(Labels, Helpers) {
  EXPECT_TRUE(is_valid_label("O"));
  EXPECT_TRUE(is_valid_label("B-x"));
  EXPECT_FALSE(is_valid_label("B-"));
  EXPECT_FALSE(is_valid_label("o"));
  EXPECT_FALSE(is_valid_label("E-x"));
  EXPECT_EQ(label_category("I-loc"), "loc");
  EXPECT_EQ(label_category("O"), "");
}

TEST(Sentence, RejectsInvalid) {
  EXPECT_THROW(Sentence(0, {}), DataError);
  EXPECT_THROW(Sentence(0, tokens("a b/I-x")), DataError);
  EXPECT_THROW(Sentence(0, {{"two words", "O"}}), DataError);
  EXPECT_THROW(Sentence(0, {{"", "O"}}), DataError);
  EXPECT_THROW(Sentence(0, tokens("a/B-x b/I-y")), DataError);
}

TEST(WriteConll, ExactBytes) {
  const auto c = corpus_of({"John/B-per smiled"});
  EXPECT_EQ(to_conll_string(c), "John\tB-per\nsmiled\tO\n\n");
}

TEST(WriteConll, EmptyCorpusIsAnError) {
  EXPECT_THROW(to_conll_string(Corpus{}), DataError);
}

TEST(Properties, RoundTripSpanConsistencyAndRepairIdempotence) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    testing::SynthOptions o;
    o.sentences = 40;
    o.seed = seed;
    const auto c = testing::synthetic_corpus(o);
    const auto back = parse_conll_string(to_conll_string(c), RepairPolicy::kStrict);
    EXPECT_EQ(back.corpus, c) << "seed " << seed;

    for (const auto& s : c.sentences()) {
      const auto labels = labels_from_spans(s.spans(), s.size());
      for (std::size_t i = 0; i < s.size(); ++i) {
        ASSERT_EQ(labels[i], s.tokens()[i].label);
      }
    }

    // Scramble labels into BIO-invalid sequences and check coerce(coerce(x)).
    Rng rng(seed);
    const char* pool[] = {"O", "B-a", "I-a", "B-b", "I-b"};
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<Token> toks;
      for (int i = 0; i < 8; ++i) toks.push_back({"w", pool[uniform_index(rng, 5)]});
      auto once = toks;
      coerce_bio(once);
      EXPECT_EQ(first_bio_violation(once), std::string_view::npos);
      auto twice = once;
      EXPECT_EQ(coerce_bio(twice), 0u);
      EXPECT_EQ(twice, once);
    }
  }
}

}  // namespace
}  // namespace idkit
