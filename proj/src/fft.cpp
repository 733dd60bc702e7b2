#include "zdiv/fft.hpp"

#include <fftw3.h>

#include <memory>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace zdiv {

namespace {

// fftw_plan creation is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanPair {
  fftw_complex* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  std::size_t n = 0;

  explicit PlanPair(std::size_t size) : n(size) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    in = fftw_alloc_complex(n);
    out = fftw_alloc_complex(n);
    fwd = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  PlanPair(const PlanPair&) = delete;
  PlanPair& operator=(const PlanPair&) = delete;
  ~PlanPair() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(in);
    fftw_free(out);
  }
};

PlanPair& plan_for(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::unique_ptr<PlanPair>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, std::make_unique<PlanPair>(n)).first;
  }
  return *it->second;
}

void execute(cvec& x, bool forward) {
  if (x.empty()) throw std::invalid_argument("fft: empty input");
  PlanPair& p = plan_for(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    p.in[i][0] = x[i].real();
    p.in[i][1] = x[i].imag();
  }
  fftw_execute(forward ? p.fwd : p.bwd);
  const double scale = forward ? 1.0 : 1.0 / static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = cplx(p.out[i][0] * scale, p.out[i][1] * scale);
  }
}

}  // namespace

void fft_inplace(cvec& x) { execute(x, true); }
void ifft_inplace(cvec& x) { execute(x, false); }

cvec fft(const cvec& x) {
  cvec y = x;
  fft_inplace(y);
  return y;
}

cvec ifft(const cvec& x) {
  cvec y = x;
  ifft_inplace(y);
  return y;
}

double bin_frequency_hz(std::size_t k, std::size_t n, double fs_hz) {
  const double df = fs_hz / static_cast<double>(n);
  if (k <= n / 2) return static_cast<double>(k) * df;
  return (static_cast<double>(k) - static_cast<double>(n)) * df;
}

}  // namespace zdiv
