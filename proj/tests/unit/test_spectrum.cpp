#include <gtest/gtest.h>

#include <cmath>

#include "idkit/random.hpp"
#include "idkit/spectrum.hpp"
#include "support/oracles.hpp"

namespace idkit {
namespace {

void expect_close(const std::vector<double>& fast, const std::vector<double>& slow) {
  ASSERT_EQ(fast.size(), slow.size());
  double scale = 0;
  for (double v : slow) scale = std::max(scale, std::abs(v));
  for (std::size_t k = 0; k < fast.size(); ++k) {
    EXPECT_NEAR(fast[k], slow[k], 1e-9 * std::max(scale, 1.0)) << "bin " << k;
  }
}

TEST(PowerSpectrum, MatchesBruteForceDft) {
  Rng rng(3);
  for (std::size_t n : {2u, 3u, 5u, 8u, 13u, 16u, 31u, 64u}) {
    std::vector<double> x(n);
    for (auto& v : x) v = uniform01(rng) - 0.3;
    expect_close(power_spectrum(x), testing::dft_power(x));
  }
}

TEST(PowerSpectrum, KnownShapes) {
  const std::vector<double> impulse = {1, 0, 0, 0, 0, 0};
  for (double p : power_spectrum(impulse)) EXPECT_NEAR(p, 1.0, 1e-12);
  const std::vector<double> flat = {0.25, 0.25, 0.25, 0.25};
  const auto p = power_spectrum(flat);
  ASSERT_EQ(p.size(), 3u);
  EXPECT_NEAR(p[0], 1.0, 1e-12);
  EXPECT_NEAR(p[1], 0.0, 1e-12);
  EXPECT_NEAR(p[2], 0.0, 1e-12);
}

TEST(PowerSpectrum2d, MatchesBruteForce) {
  Rng rng(4);
  for (std::size_t n : {3u, 4u, 6u}) {
    std::vector<double> m(n * n);
    for (auto& v : m) v = uniform01(rng);
    const auto fast = power_spectrum_2d(m, n, n);
    ASSERT_EQ(fast.size(), n * n);
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = 0; v < n; ++v) {
        double re = 0, im = 0;
        for (std::size_t a = 0; a < n; ++a) {
          for (std::size_t b = 0; b < n; ++b) {
            const double ang = -2 * M_PI * static_cast<double>((u * a + v * b) % n) / n;
            re += m[a * n + b] * std::cos(ang);
            im += m[a * n + b] * std::sin(ang);
          }
        }
        EXPECT_NEAR(fast[u * n + v], re * re + im * im, 1e-9);
      }
    }
  }
}

}  // namespace
}  // namespace idkit
