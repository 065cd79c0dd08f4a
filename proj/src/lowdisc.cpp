#include "idkit/lowdisc.hpp"

#include <boost/random/sobol.hpp>
#include <cmath>

#include "idkit/error.hpp"

namespace idkit {

struct SobolSequence::Impl {
  explicit Impl(std::size_t dims) : engine(dims) {}
  boost::random::sobol engine;
};

SobolSequence::SobolSequence(std::size_t dims)
    : dims_(dims), impl_(std::make_unique<Impl>(dims)) {
  if (dims == 0) throw UsageError("Sobol sequence needs at least 1 dimension");
}
SobolSequence::~SobolSequence() = default;
SobolSequence::SobolSequence(SobolSequence&&) noexcept = default;
SobolSequence& SobolSequence::operator=(SobolSequence&&) noexcept = default;

void SobolSequence::next(std::span<double> point) {
  if (point.size() != dims_) throw UsageError("Sobol point size mismatch");
  for (auto& v : point) v = std::ldexp(static_cast<double>(impl_->engine()), -64);
}

}  // namespace idkit
