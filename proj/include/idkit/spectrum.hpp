#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace idkit {

// One-sided power spectrum |F_k|^2, k = 0..n/2, of a real sequence (FFTW).
std::vector<double> power_spectrum(std::span<const double> x);

// Full power spectrum |F_{u,v}|^2 of a row-major rows x cols real matrix.
std::vector<double> power_spectrum_2d(std::span<const double> m,
                                      std::size_t rows, std::size_t cols);

}  // namespace idkit
