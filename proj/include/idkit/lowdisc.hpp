#pragma once

#include <cstddef>
#include <memory>
#include <span>

namespace idkit {

// Unscrambled Sobol points in [0,1)^dims (Joe-Kuo direction numbers). The
// all-zero first point is skipped.
class SobolSequence {
 public:
  explicit SobolSequence(std::size_t dims);
  ~SobolSequence();
  SobolSequence(SobolSequence&&) noexcept;
  SobolSequence& operator=(SobolSequence&&) noexcept;

  std::size_t dims() const { return dims_; }
  void next(std::span<double> point);

 private:
  struct Impl;
  std::size_t dims_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace idkit
