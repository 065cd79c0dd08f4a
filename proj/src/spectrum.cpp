#include "idkit/spectrum.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "idkit/error.hpp"

namespace idkit {

namespace {

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};
template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter>;

FftwBuffer<double> alloc_real(std::size_t n) {
  return FftwBuffer<double>(fftw_alloc_real(n));
}
FftwBuffer<fftw_complex> alloc_complex(std::size_t n) {
  return FftwBuffer<fftw_complex>(fftw_alloc_complex(n));
}

// The FFTW planner is not thread-safe; executing a plan on fresh
// fftw_malloc'ed arrays is. Plans are created once per shape under a lock.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan r2c_1d(std::size_t n) {
    std::lock_guard lock(mu_);
    auto& p = r2c_[n];
    if (!p) {
      auto in = alloc_real(n);
      auto out = alloc_complex(n / 2 + 1);
      p = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(),
                               FFTW_ESTIMATE);
    }
    return p;
  }

  fftw_plan dft_2d(std::size_t rows, std::size_t cols) {
    std::lock_guard lock(mu_);
    auto& p = c2c_[{rows, cols}];
    if (!p) {
      auto in = alloc_complex(rows * cols);
      auto out = alloc_complex(rows * cols);
      p = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols),
                           in.get(), out.get(), FFTW_FORWARD, FFTW_ESTIMATE);
    }
    return p;
  }

  ~PlanCache() {
    for (auto& [_, p] : r2c_) fftw_destroy_plan(p);
    for (auto& [_, p] : c2c_) fftw_destroy_plan(p);
  }

 private:
  std::mutex mu_;
  std::map<std::size_t, fftw_plan> r2c_;
  std::map<std::pair<std::size_t, std::size_t>, fftw_plan> c2c_;
};

}  // namespace

std::vector<double> power_spectrum(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) throw DataError("power spectrum of an empty sequence");
  const fftw_plan plan = PlanCache::instance().r2c_1d(n);
  auto in = alloc_real(n);
  auto out = alloc_complex(n / 2 + 1);
  std::copy(x.begin(), x.end(), in.get());
  fftw_execute_dft_r2c(plan, in.get(), out.get());
  std::vector<double> power(n / 2 + 1);
  for (std::size_t k = 0; k < power.size(); ++k) {
    power[k] = out[k][0] * out[k][0] + out[k][1] * out[k][1];
  }
  return power;
}

std::vector<double> power_spectrum_2d(std::span<const double> m,
                                      std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0 || m.size() != rows * cols) {
    throw DataError("2-D power spectrum shape mismatch");
  }
  const fftw_plan plan = PlanCache::instance().dft_2d(rows, cols);
  auto in = alloc_complex(m.size());
  auto out = alloc_complex(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    in[i][0] = m[i];
    in[i][1] = 0.0;
  }
  fftw_execute_dft(plan, in.get(), out.get());
  std::vector<double> power(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    power[i] = out[i][0] * out[i][0] + out[i][1] * out[i][1];
  }
  return power;
}

}  // namespace idkit
