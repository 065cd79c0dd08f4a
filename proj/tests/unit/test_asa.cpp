#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "idkit/asa.hpp"
#include "idkit/error.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"

namespace idkit {
namespace {

using testing::identity_attention;
using testing::uniform_attention;

TEST(Asa, UniformIsExactlyZero) {
  for (std::size_t L : {2u, 3u, 7u, 8u, 13u, 64u}) {
    EXPECT_EQ(compute_asa(uniform_attention(2, 3, L)).asa, 0.0) << L;
    AsaConfig full;
    full.mode = AsaMode::kFull2d;
    EXPECT_EQ(compute_asa(uniform_attention(1, 1, L), full).asa, 0.0) << L;
  }
}

TEST(Asa, IdentityL8IsTwo) {
  EXPECT_NEAR(compute_asa(identity_attention(1, 1, 8)).asa, 2.0, 1e-9);
  EXPECT_NEAR(testing::brute_asa(identity_attention(1, 1, 8)), 2.0, 1e-9);
  AsaConfig norm;
  norm.weight = AsaWeight::kNormalizedFrequency;
  EXPECT_NEAR(compute_asa(identity_attention(1, 1, 8), norm).asa, 0.5, 1e-9);
}

TEST(Asa, IdentityAboveUniform) {
  for (std::size_t L = 4; L <= 40; ++L) {
    const double id = compute_asa(identity_attention(1, 1, L)).asa;
    EXPECT_GT(id, 0.0) << L;
    std::size_t half = L / 2;
    EXPECT_NEAR(id, static_cast<double>(half) / 2.0, 1e-9) << L;
  }
}

// A period-2 row keeps half its power at DC, so the centroid sits at L/4.
TEST(Asa, AlternatingRowSitsHalfwayToNyquist) {
  for (std::size_t L : {4u, 8u, 16u, 32u}) {
    AttentionTensor t(1, 1, L);
    for (std::size_t q = 0; q < L; ++q) {
      for (std::size_t k = q % 2; k < L; k += 2) t.row(0, 0, q)[k] = 2.0f / L;
    }
    EXPECT_NEAR(testing::brute_asa(t), L / 4.0, 1e-9);
    EXPECT_NEAR(compute_asa(t).asa, L / 4.0, 1e-9);
  }
}

TEST(Asa, MatchesBruteForceOnRandomTensors) {
  Rng rng(21);
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t L = 2 + uniform_index(rng, 30);
    const auto t = testing::random_attention(rng, 2, 2, L);
    const double slow = testing::brute_asa(t);
    EXPECT_NEAR(compute_asa(t).asa, slow, 1e-6 * std::max(1.0, slow)) << L;
  }
}

TEST(Asa, Full2dMatchesBruteForce) {
  Rng rng(22);
  AsaConfig cfg;
  cfg.mode = AsaMode::kFull2d;
  for (std::size_t L : {2u, 3u, 5u, 8u, 9u}) {
    const auto t = testing::random_attention(rng, 1, 2, L);
    const double slow = testing::brute_asa_2d(t);
    EXPECT_NEAR(compute_asa(t, cfg).asa, slow, 1e-6 * std::max(1.0, slow)) << L;
  }
}

TEST(Asa, BoundedByHalfLength) {
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t L = 2 + uniform_index(rng, 20);
    const auto t = testing::random_attention(rng, 1, 1, L);
    const double a = compute_asa(t).asa;
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, static_cast<double>(L / 2));
  }
}

TEST(Asa, SharpeningIsMonotone) {
  Rng rng(8);
  const std::size_t L = 32;
  std::vector<double> logits(L * L);
  for (auto& v : logits) v = 4 * uniform01(rng) - 2;
  double prev = -1;
  for (double tau : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double a = compute_asa(testing::tempered_attention(logits, L, tau)).asa;
    EXPECT_GE(a, prev) << tau;
    prev = a;
  }
}

TEST(Asa, PerLayerAndPermutationInvariance) {
  Rng rng(6);
  const auto t = testing::random_attention(rng, 3, 4, 10);
  AsaConfig per;
  per.aggregate = AsaAggregate::kPerLayer;
  const auto r = compute_asa(t, per);
  ASSERT_EQ(r.per_layer.size(), 3u);
  EXPECT_NEAR((r.per_layer[0] + r.per_layer[1] + r.per_layer[2]) / 3, r.asa, 1e-12);
  EXPECT_TRUE(compute_asa(t).per_layer.empty());

  // Reverse the layer order and rotate the heads.
  AttentionTensor p(3, 4, 10);
  for (std::size_t l = 0; l < 3; ++l) {
    for (std::size_t h = 0; h < 4; ++h) {
      const auto src = t.matrix(2 - l, (h + 1) % 4);
      std::copy(src.begin(), src.end(), p.matrix(l, h).begin());
    }
  }
  EXPECT_NEAR(compute_asa(p).asa, r.asa, 1e-12);
}

TEST(Asa, ValidationErrorsCiteLocation) {
  EXPECT_THROW(compute_asa(AttentionTensor(1, 1, 1)), DataError);
  auto t = uniform_attention(2, 2, 4);
  t.row(1, 0, 3)[0] = 0.9f;
  try {
    compute_asa(t);
    FAIL();
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("layer 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("head 0"), std::string::npos) << msg;
    EXPECT_NE(msg.find("row 3"), std::string::npos) << msg;
  }
  auto neg = uniform_attention(1, 1, 4);
  neg.row(0, 0, 0)[0] = -0.25f;
  neg.row(0, 0, 0)[1] = 0.75f;
  EXPECT_THROW(neg.validate(), DataError);
  auto nan = uniform_attention(1, 1, 4);
  nan.row(0, 0, 0)[0] = std::nanf("");
  EXPECT_THROW(nan.validate(), DataError);
}

std::vector<DensityAsaInput> density_inputs() {
  Rng rng(12);
  std::vector<DensityAsaInput> out;
  const std::size_t L = 12;
  for (int i = 0; i < 5; ++i) {
    DensityAsaInput in;
    in.label = "s" + std::to_string(i);
    in.subset_features.ned = 0.05 + 0.04 * i;
    for (int k = 0; k < 3; ++k) {
      std::vector<double> logits(L * L);
      for (auto& v : logits) v = uniform01(rng);
      in.tensors.push_back(testing::tempered_attention(logits, L, 1.0 + 3.0 * i));
    }
    out.push_back(std::move(in));
  }
  return out;
}

TEST(AsaVsDensity, SharpnessRisingWithDensityCorrelates) {
  const auto table = asa_vs_density(density_inputs());
  ASSERT_EQ(table.rows.size(), 5u);
  ASSERT_TRUE(table.correlation.has_value());
  EXPECT_GT(table.correlation->spearman, 0.0);
  EXPECT_EQ(table.rows[0].tensors, 3u);
}

TEST(AsaVsDensity, SingleRecordHasNoCorrelation) {
  auto inputs = density_inputs();
  inputs.resize(1);
  const auto table = asa_vs_density(inputs);
  EXPECT_EQ(table.rows.size(), 1u);
  EXPECT_FALSE(table.correlation.has_value());
  EXPECT_FALSE(table.note.empty());
}

TEST(AsaVsDensity, OrderIndependent) {
  auto inputs = density_inputs();
  const auto a = asa_vs_density(inputs);
  std::reverse(inputs.begin(), inputs.end());
  std::swap(inputs[1], inputs[3]);
  const auto b = asa_vs_density(inputs);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].label, b.rows[i].label);
    EXPECT_EQ(a.rows[i].mean_asa, b.rows[i].mean_asa);
  }
  EXPECT_EQ(a.correlation->spearman, b.correlation->spearman);
}

TEST(AsaVsDensity, EmptySubsetRejected) {
  std::vector<DensityAsaInput> inputs(1);
  inputs[0].label = "empty";
  EXPECT_THROW(asa_vs_density(inputs), DataError);
}

}  // namespace
}  // namespace idkit
