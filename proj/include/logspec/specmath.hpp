#pragma once

// Canonical frequency grid, zero-padded DFT and the digamma/trigamma
// functions used to calibrate log-chi-square variables.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "logspec/errors.hpp"

namespace logspec {

inline constexpr double kEulerGamma = 0.57721566490153286061;

// Grid of M = 2N+2 equispaced frequencies f_j = j/M on the unit circle.
// f_0 = 0 and f_{M/2} = 1/2; the points j = 0..N+1 are the nonredundant half.
class FrequencyGrid {
 public:
  FrequencyGrid() = default;
  explicit FrequencyGrid(std::size_t n) : n_(n) {}

  std::size_t n() const noexcept { return n_; }
  std::size_t size() const noexcept { return 2 * n_ + 2; }
  std::size_t half_size() const noexcept { return n_ + 2; }
  double spacing() const noexcept { return 1.0 / static_cast<double>(size()); }
  double frequency(std::size_t j) const noexcept {
    return static_cast<double>(j) * spacing();
  }

  // Index of the grid point equivalent to j (mod M) in [0, M).
  std::size_t wrap(std::ptrdiff_t j) const noexcept {
    const auto m = static_cast<std::ptrdiff_t>(size());
    auto r = j % m;
    return static_cast<std::size_t>(r < 0 ? r + m : r);
  }

  // Even reflection into the half [0, M/2].
  std::size_t fold(std::ptrdiff_t j) const noexcept {
    const std::size_t w = wrap(j);
    return w <= n_ + 1 ? w : size() - w;
  }

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

 private:
  std::size_t n_ = 0;
};

struct ComplexSpectrum {
  FrequencyGrid grid;
  std::vector<std::complex<double>> values;
};

namespace detail {

using cplx = std::complex<double>;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// In-place iterative radix-2 transform; sign = -1 forward, +1 backward (unscaled).
inline void fft_pow2(std::vector<cplx>& a, int sign) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    const std::size_t half = len / 2;
    std::vector<cplx> tw(half);
    for (std::size_t k = 0; k < half; ++k)
      tw[k] = std::polar(1.0, ang * static_cast<double>(k));
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const cplx u = a[i + k];
        const cplx v = a[i + k + half] * tw[k];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

// Bluestein chirp-z plan for an arbitrary forward length.
struct BluesteinPlan {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<cplx> chirp;       // exp(-i pi k^2 / n)
  std::vector<cplx> filter_fft;  // FFT of conj chirp, wrapped

  explicit BluesteinPlan(std::size_t len) : n(len), m(next_pow2(2 * len - 1)) {
    chirp.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      // k^2 mod 2n keeps the phase argument small for large k.
      const auto k2 = static_cast<double>((static_cast<unsigned long long>(k) * k) % (2 * n));
      chirp[k] = std::polar(1.0, -std::numbers::pi * k2 / static_cast<double>(n));
    }
    filter_fft.assign(m, cplx{});
    filter_fft[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) {
      filter_fft[k] = std::conj(chirp[k]);
      filter_fft[m - k] = std::conj(chirp[k]);
    }
    fft_pow2(filter_fft, -1);
  }

  void forward(std::vector<cplx>& a) const {
    std::vector<cplx> work(m, cplx{});
    for (std::size_t k = 0; k < n; ++k) work[k] = a[k] * chirp[k];
    fft_pow2(work, -1);
    for (std::size_t k = 0; k < m; ++k) work[k] *= filter_fft[k];
    fft_pow2(work, +1);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) a[k] = work[k] * chirp[k] * scale;
  }
};

inline const BluesteinPlan& bluestein_plan(std::size_t n) {
  thread_local std::unordered_map<std::size_t, BluesteinPlan> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, BluesteinPlan(n)).first;
  return it->second;
}

}  // namespace detail

// Forward DFT X_j = sum_k a_k exp(-2 pi i jk/n) of any length, in place.
inline void fft_forward(std::vector<std::complex<double>>& a) {
  if (a.size() <= 1) return;
  if (detail::is_pow2(a.size()))
    detail::fft_pow2(a, -1);
  else
    detail::bluestein_plan(a.size()).forward(a);
}

// zeta(f_j) = sum_{m=1}^{N} x_m exp(-2 pi i m f_j) on the 2N+2 grid.
// Sample x_m sits at buffer position m (1-based, positions 0 and N+1 are zero).
inline ComplexSpectrum dft_grid(std::span<const double> series) {
  if (series.size() < 4) throw InvalidInput("dft_grid: series needs at least 4 samples");
  const FrequencyGrid grid(series.size());
  std::vector<std::complex<double>> buf(grid.size());
  for (std::size_t m = 0; m < series.size(); ++m) buf[m + 1] = series[m];
  fft_forward(buf);
  return {grid, std::move(buf)};
}

// psi(x): upward recurrence to x >= 6, then the asymptotic series.
inline double digamma(double x) {
  if (!(x > 0.0)) throw DomainError("digamma: argument must be positive");
  double acc = 0.0;
  while (x < 6.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double r = 1.0 / (x * x);
  const double series =
      r * (1.0 / 12 -
           r * (1.0 / 120 -
                r * (1.0 / 252 -
                     r * (1.0 / 240 - r * (1.0 / 132 - r * (691.0 / 32760 - r / 12))))));
  return acc + std::log(x) - 0.5 / x - series;
}

inline double trigamma(double x) {
  if (!(x > 0.0)) throw DomainError("trigamma: argument must be positive");
  double acc = 0.0;
  while (x < 6.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double r = 1.0 / (x * x);
  // 1/x + 1/2x^2 + sum B_2k / x^(2k+1)
  const double tail =
      r * (1.0 / 6 -
           r * (1.0 / 30 -
                r * (1.0 / 42 - r * (1.0 / 30 - r * (5.0 / 66 - r * (691.0 / 2730 - r * 7.0 / 6))))));
  return acc + 1.0 / x + 0.5 * r + tail / x;
}

}  // namespace logspec
