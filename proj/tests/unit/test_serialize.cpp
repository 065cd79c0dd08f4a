#include <gtest/gtest.h>

#include <sstream>

#include "idkit/serialize.hpp"
#include "support/synth.hpp"

namespace idkit {
namespace {

FeatureVector sample_features() {
  FeatureVector fv;
  fv.ned = 0.1;
  fv.norm_std = 0.25;
  fv.redundancy = 0;
  fv.ele = 1.0 / 3;
  fv.ssr = 1.5;
  fv.vocab_entropy = 7.125;
  return fv;
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(4.0 / 7), "0.5714285714285714");
  EXPECT_EQ(format_double(2), "2");
  for (double v : {1.0 / 3, 1e-300, 123456.789, -0.0625}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(Features, JsonRoundTripAndCsv) {
  const auto fv = sample_features();
  const auto j = to_json(fv);
  EXPECT_EQ(j.begin().key(), "ned");
  const auto back = feature_vector_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.as_array(), fv.as_array());
  EXPECT_EQ(csv_header_features(), "ned,norm_std,redundancy,ele,ssr,vocab_entropy");
  EXPECT_EQ(csv_row(fv), "0.1,0.25,0,0.3333333333333333,1.5,7.125");
}

TEST(Score, CsvRow) {
  const auto gold = testing::corpus_of({"A/B-per b C/B-loc", "D/B-org E/I-org f G/B-per"});
  const auto pred = testing::corpus_of({"A/B-per b C/B-loc", "D/B-org E f G"});
  const auto r = score_spans(gold, pred);
  EXPECT_EQ(csv_row(r), "2,1,2,0.6666666666666666,0.5,0.5714285714285714,0.5");
  EXPECT_EQ(to_json(r)["f1"].get<double>(), 4.0 / 7);
}

TEST(Manifest, RoundTrip) {
  SubsetManifest m;
  m.spec.seed = 99;
  m.spec.strategy = SubsetStrategy::kDensityFamily;
  m.spec.p = 0.7;
  m.sentence_ids = {0, 2, 5};
  m.features = sample_features();
  m.bins = {{"D_O", 10, 10, 1.0}, {"D_E", 8, 6, 0.75}};
  const auto back = manifest_from_json(nlohmann::json::parse(to_json(m).dump()));
  EXPECT_EQ(back.spec.seed, 99u);
  EXPECT_EQ(back.spec.strategy, SubsetStrategy::kDensityFamily);
  EXPECT_EQ(back.spec.p, 0.7);
  EXPECT_EQ(back.sentence_ids, m.sentence_ids);
  EXPECT_EQ(back.bins.size(), 2u);
  EXPECT_EQ(back.bins[1].retained, 6u);
  EXPECT_EQ(back.features.as_array(), m.features.as_array());

  auto bad = nlohmann::json::parse(to_json(m).dump());
  bad["spec"]["strategy"] = "random";
  EXPECT_THROW(manifest_from_json(bad), DataError);
  EXPECT_THROW(manifest_from_json(nlohmann::json::object()), DataError);
}

TEST(Records, JsonLinesAndCsvAgree) {
  ExperimentRecord a{sample_features(), 0.8, 0.75, std::nullopt, "s,1"};
  ExperimentRecord b{sample_features(), 0.6, std::nullopt, 0.5, "s2"};
  b.features.ned = 0.3;

  std::ostringstream jsonl, csv;
  jsonl << to_json(a).dump() << "\n\n" << to_json(b).dump() << "\n";
  csv << csv_header_record() << "\n" << csv_row(a) << "\n" << csv_row(b) << "\n";

  for (const std::string text : {jsonl.str(), csv.str()}) {
    std::istringstream is(text);
    const auto rs = read_records(is);
    ASSERT_EQ(rs.size(), 2u);
    EXPECT_EQ(rs[0].subset_id, "s,1");
    EXPECT_EQ(rs[0].f1, 0.8);
    EXPECT_EQ(rs[0].precision, 0.75);
    EXPECT_FALSE(rs[0].recall.has_value());
    EXPECT_EQ(rs[1].features.ned, 0.3);
    EXPECT_EQ(rs[1].recall, 0.5);
  }
}

TEST(Records, FlatJsonAndReorderedCsv) {
  std::istringstream flat(
      R"({"ned":0.2,"norm_std":0,"redundancy":0,"ele":0,"ssr":1,"vocab_entropy":3,"f1":0.5})");
  EXPECT_EQ(read_records(flat)[0].features.ned, 0.2);

  std::istringstream csv(
      "f1,vocab_entropy,ssr,ele,redundancy,norm_std,ned\n0.9,1,2,3,4,5,6\n");
  const auto r = read_records(csv)[0];
  EXPECT_EQ(r.f1, 0.9);
  EXPECT_EQ(r.features.ned, 6);
  EXPECT_EQ(r.features.vocab_entropy, 1);
}

TEST(Records, Errors) {
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream is(text);
    try {
      read_records(is);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("ned,f1\n0.1,0.2\n"), 1u);
  EXPECT_EQ(line_of("ned,norm_std,redundancy,ele,ssr,vocab_entropy,f1\n"
                    "1,2,3,4,5,6,0.5\n1,2,3,4,5,x,0.5\n"),
            3u);
  EXPECT_EQ(line_of("ned,norm_std,redundancy,ele,ssr,vocab_entropy,f1\n1,2\n"), 2u);
  EXPECT_EQ(line_of("{\"ned\": 1}\n"), 1u);
  EXPECT_EQ(line_of("{\"ned\": 0.1, \"norm_std\": 0, \"redundancy\": 0, \"ele\": 0, "
                    "\"ssr\": 1, \"vocab_entropy\": 2, \"f1\": 0.2}\n{oops\n"),
            2u);
  std::istringstream blank("  \n");
  EXPECT_THROW(read_records(blank), DataError);
  EXPECT_THROW(read_records_file("/nonexistent/records.csv"), DataError);
}

TEST(Reports, WomAndSweepShapes) {
  SweepRow row{30, 0.07, 4, 2, 5, 4, 1, 24};
  EXPECT_EQ(csv_row(row), "30,0.07,4,2,5,4,1,24");
  EXPECT_EQ(to_json(row)["barren_windows"], 2);

  Window w{1, 5, 10, 0.05, true};
  EXPECT_EQ(to_json(w).dump(),
            R"({"index":1,"begin":5,"end":10,"density":0.05,"barren":true})");

  DensityAsaTable t;
  t.rows.push_back({"a", 0.1, 1.5, 2});
  t.note = "correlation unavailable";
  const auto j = to_json(t);
  EXPECT_TRUE(j["correlation"].is_null());
  EXPECT_EQ(j["note"], "correlation unavailable");

  AsaResult ar{1.25, {1.0, 1.5}};
  EXPECT_EQ(to_json(ar).dump(), R"({"asa":1.25,"per_layer":[1.0,1.5]})");
}

}  // namespace
}  // namespace idkit
