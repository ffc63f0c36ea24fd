#include "brox/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

#include "brox/errors.hpp"

namespace brox::fft {
namespace {

struct Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

// FFTW planning is not thread-safe; execution with new-array calls is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct Buffers {
  std::size_t n = 0;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  ~Buffers() {
    if (real) fftw_free(real);
    if (spec) fftw_free(spec);
  }
  void ensure(std::size_t m) {
    if (n == m) return;
    if (real) fftw_free(real);
    if (spec) fftw_free(spec);
    real = static_cast<double*>(fftw_malloc(sizeof(double) * m));
    spec = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (m / 2 + 1)));
    n = m;
  }
};

thread_local std::map<std::size_t, std::unique_ptr<Buffers>> tl_buffers;

Buffers& buffers_for(std::size_t m) {
  auto& slot = tl_buffers[m];
  if (!slot) {
    slot = std::make_unique<Buffers>();
    slot->ensure(m);
  }
  return *slot;
}

const Plans& plans_for(std::size_t m) {
  static std::map<std::size_t, Plans> cache;
  std::lock_guard lock(planner_mutex());
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  // FFTW_ESTIMATE keeps the algorithm choice, and hence every output bit, reproducible.
  double* r = static_cast<double*>(fftw_malloc(sizeof(double) * m));
  auto* c = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (m / 2 + 1)));
  Plans p;
  p.r2c = fftw_plan_dft_r2c_1d(static_cast<int>(m), r, c, FFTW_ESTIMATE);
  p.c2r = fftw_plan_dft_c2r_1d(static_cast<int>(m), c, r, FFTW_ESTIMATE);
  fftw_free(r);
  fftw_free(c);
  if (!p.r2c || !p.c2r) throw GridError("FFTW planning failed");
  return cache.emplace(m, p).first->second;
}

}  // namespace

void forward(std::span<const double> values, std::span<std::complex<double>> half_spectrum) {
  const std::size_t m = values.size();
  if (half_spectrum.size() != m / 2 + 1) throw GridError("forward FFT: spectrum size mismatch");
  const Plans& p = plans_for(m);
  Buffers& b = buffers_for(m);
  std::copy(values.begin(), values.end(), b.real);
  fftw_execute_dft_r2c(p.r2c, b.real, b.spec);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k <= m / 2; ++k)
    half_spectrum[k] = std::complex<double>(b.spec[k][0] * scale, b.spec[k][1] * scale);
}

void backward(std::span<const std::complex<double>> half_spectrum, std::span<double> values) {
  const std::size_t m = values.size();
  if (half_spectrum.size() != m / 2 + 1) throw GridError("backward FFT: spectrum size mismatch");
  const Plans& p = plans_for(m);
  Buffers& b = buffers_for(m);
  for (std::size_t k = 0; k <= m / 2; ++k) {
    b.spec[k][0] = half_spectrum[k].real();
    b.spec[k][1] = half_spectrum[k].imag();
  }
  fftw_execute_dft_c2r(p.c2r, b.spec, b.real);
  std::copy(b.real, b.real + m, values.begin());
}

}  // namespace brox::fft
