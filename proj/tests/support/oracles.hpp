#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "idkit/asa.hpp"

namespace idkit::testing {

// |X_k|^2 for k = 0..floor(L/2) by the O(L^2) definition.
std::vector<double> dft_power(std::span<const double> x);

// Row-wise ASA computed with dft_power, bin-index weights, mean over rows,
// heads and layers.
double brute_asa(const AttentionTensor& t);

// Full 2-D DFT power summed into radial bins round(sqrt(du^2 + dv^2)) with
// wrapped frequencies, then the same weighted ratio; mean over matrices.
double brute_asa_2d(const AttentionTensor& t);

// Population standard deviation of the proportions times C / sqrt(C - 1).
double norm_std_oracle(const std::vector<double>& counts);

// Shannon entropy of counts in the given log base.
double entropy_oracle(const std::vector<double>& counts, double base);

struct Ishigami {
  double a = 7;
  double b = 0.1;
  double operator()(double x1, double x2, double x3) const;
  double variance() const;
  std::array<double, 3> s1() const;
  std::array<double, 3> st() const;
};

}  // namespace idkit::testing
