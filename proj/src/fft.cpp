#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace fbm::detail {

namespace {

class PlanCache {
 public:
  fftw_plan get(int n, bool inverse) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find({n, inverse});
    if (it != plans_.end()) return it->second;
    std::vector<std::complex<double>> scratch(static_cast<std::size_t>(n));
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_1d(n, buf, buf, inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(std::make_pair(n, inverse), plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, bool>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

void dft_inplace(std::vector<std::complex<double>>& data, bool inverse) {
  const int n = static_cast<int>(data.size());
  if (n == 0) return;
  fftw_plan plan = cache().get(n, inverse);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
  if (inverse) {
    const double scale = 1.0 / n;
    for (auto& v : data) v *= scale;
  }
}

}  // namespace fbm::detail
