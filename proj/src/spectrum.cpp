#include "cpdd/spectrum.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace cpdd {

namespace {

// fftw planner calls are not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

double Spectrum::time_domain_energy() const {
  if (magnitude.empty()) return 0.0;
  const double len = static_cast<double>(padded_length ? padded_length : samples);
  const double n = static_cast<double>(samples) * static_cast<double>(samples) / len;
  const bool has_nyquist = (padded_length ? padded_length : samples) % 2 == 0;
  const std::size_t last = magnitude.size() - 1;
  double interior = 0.0;
  for (std::size_t k = 1; k < magnitude.size(); ++k) {
    if (has_nyquist && k == last) continue;
    interior += magnitude[k] * magnitude[k];
  }
  double edge = magnitude[0] * magnitude[0];
  if (has_nyquist && last > 0) edge += magnitude[last] * magnitude[last];
  return 0.5 * n * interior + n * edge;
}

std::size_t Spectrum::peak_bin(std::size_t first, std::size_t last) const {
  if (magnitude.empty()) throw std::invalid_argument("empty spectrum");
  if (last == 0 || last >= magnitude.size()) last = magnitude.size() - 1;
  if (first > last) throw std::invalid_argument("empty peak search range");
  const auto it = std::max_element(magnitude.begin() + static_cast<std::ptrdiff_t>(first),
                                   magnitude.begin() + static_cast<std::ptrdiff_t>(last) + 1);
  return static_cast<std::size_t>(it - magnitude.begin());
}

Spectrum power_spectrum(std::span<const double> samples, double sample_period,
                        std::size_t padded_length) {
  const std::size_t n = samples.size();
  if (n < 2) throw std::invalid_argument("spectrum needs at least two samples");
  if (!(sample_period > 0.0)) throw std::invalid_argument("sample period must be > 0");
  if (!std::all_of(samples.begin(), samples.end(), [](double v) { return std::isfinite(v); }))
    throw std::invalid_argument("spectrum input contains non-finite values");
  const std::size_t len = std::max(n, padded_length);

  long double acc = 0.0L;
  for (double v : samples) acc += v;
  const double mean = static_cast<double>(acc / static_cast<long double>(n));

  std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * len)));
  const std::size_t bins = len / 2 + 1;
  std::unique_ptr<fftw_complex, FftwFree> out(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)));
  if (!in || !out) throw std::bad_alloc();

  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(len), in.get(), out.get(), FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < n; ++i) in.get()[i] = samples[i] - mean;
  std::fill(in.get() + n, in.get() + len, 0.0);
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }

  Spectrum s;
  s.samples = n;
  s.padded_length = len == n ? 0 : len;
  s.bin_width = 1.0 / (static_cast<double>(len) * sample_period);
  s.frequency.resize(bins);
  s.magnitude.resize(bins);
  // scaled by the unpadded length so amplitudes stay comparable
  const double inv = 1.0 / static_cast<double>(n);
  const bool has_nyquist = len % 2 == 0;
  for (std::size_t k = 0; k < bins; ++k) {
    const double mag = std::hypot(out.get()[k][0], out.get()[k][1]) * inv;
    const bool edge = k == 0 || (has_nyquist && k == bins - 1);
    s.magnitude[k] = edge ? mag : 2.0 * mag;
    s.frequency[k] = static_cast<double>(k) * s.bin_width;
  }
  return s;
}

}  // namespace cpdd
