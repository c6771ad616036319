#include "knscatter/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace kn::fft {
namespace {

struct PlanCache {
  std::mutex mu;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans;

  ~PlanCache() {
    for (auto& [key, p] : plans) fftw_destroy_plan(p);
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(n, sign);
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;
    // Planning scratch: FFTW_ESTIMATE leaves the arrays untouched and keeps
    // plans deterministic; UNALIGNED lets us execute on arbitrary vectors.
    std::vector<cplx> scratch(n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans.emplace(key, p);
    return p;
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

void run(std::vector<cplx>& data, int sign) {
  if (data.empty()) return;
  fftw_plan p = cache().get(data.size(), sign);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(p, buf, buf);
}

}  // namespace

void forward(std::vector<cplx>& data) { run(data, FFTW_FORWARD); }
void inverse(std::vector<cplx>& data) { run(data, FFTW_BACKWARD); }

}  // namespace kn::fft
