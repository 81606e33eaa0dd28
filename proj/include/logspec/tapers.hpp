#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "logspec/errors.hpp"
#include "logspec/specmath.hpp"

namespace logspec {

enum class TaperFamily { sinusoidal, tukey, custom };

// K orthonormal tapers of length N with weights summing to one.
class TaperSet {
 public:
  TaperSet(TaperFamily family, std::vector<std::vector<double>> vectors,
           std::vector<double> weights)
      : family_(family), vectors_(std::move(vectors)), weights_(std::move(weights)) {
    if (vectors_.empty()) throw InvalidInput("TaperSet: need at least one taper");
    n_ = vectors_.front().size();
    if (vectors_.size() > n_) throw InvalidInput("TaperSet: more tapers than samples");
    if (weights_.size() != vectors_.size())
      throw InvalidInput("TaperSet: one weight per taper required");
    for (const auto& v : vectors_)
      if (v.size() != n_) throw InvalidInput("TaperSet: tapers must share one length");
    const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("TaperSet: weights must sum to 1");
    if (family_ == TaperFamily::custom) check_orthonormal();
  }

  TaperFamily family() const noexcept { return family_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t k_count() const noexcept { return vectors_.size(); }
  const std::vector<double>& taper(std::size_t k) const { return vectors_.at(k); }
  const std::vector<std::vector<double>>& vectors() const noexcept { return vectors_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  bool uniform_weights() const noexcept {
    const double w = 1.0 / static_cast<double>(weights_.size());
    for (double mu : weights_)
      if (std::abs(mu - w) > 1e-14) return false;
    return true;
  }

 private:
  void check_orthonormal() const {
    for (std::size_t a = 0; a < vectors_.size(); ++a)
      for (std::size_t b = a; b < vectors_.size(); ++b) {
        const double dot = std::inner_product(vectors_[a].begin(), vectors_[a].end(),
                                              vectors_[b].begin(), 0.0);
        if (std::abs(dot - (a == b ? 1.0 : 0.0)) > 1e-10)
          throw InvalidInput("TaperSet: tapers are not orthonormal");
      }
  }

  TaperFamily family_;
  std::size_t n_ = 0;
  std::vector<std::vector<double>> vectors_;
  std::vector<double> weights_;
};

// nu_m^(k) = sqrt(2/(N+1)) sin(pi k m / (N+1)), m = 1..N, k = 1..K, weights 1/K.
inline TaperSet sinusoidal_tapers(std::size_t n, std::size_t k_count) {
  if (k_count < 1 || k_count > n)
    throw InvalidInput("sinusoidal_tapers: taper count must lie in [1, n]");
  const double np1 = static_cast<double>(n + 1);
  const double amp = std::sqrt(2.0 / np1);
  std::vector<std::vector<double>> vecs(k_count, std::vector<double>(n));
  for (std::size_t k = 1; k <= k_count; ++k)
    for (std::size_t m = 1; m <= n; ++m)
      vecs[k - 1][m - 1] =
          amp * std::sin(std::numbers::pi * static_cast<double>(k * m) / np1);
  return TaperSet(TaperFamily::sinusoidal, std::move(vecs),
                  std::vector<double>(k_count, 1.0 / static_cast<double>(k_count)));
}

inline constexpr double kDefaultTukeyFraction = 0.2;

// Unit-norm cosine-tapered window; `cosine_fraction` of the record is
// tapered in total, half at each end. fraction = 1 gives the Hann shape.
inline TaperSet tukey_taper(std::size_t n, double cosine_fraction = kDefaultTukeyFraction) {
  if (n < 4) throw InvalidInput("tukey_taper: need at least 4 samples");
  if (!(cosine_fraction > 0.0 && cosine_fraction <= 1.0))
    throw InvalidInput("tukey_taper: cosine fraction must lie in (0, 1]");
  const double np1 = static_cast<double>(n + 1);
  std::vector<double> w(n);
  double norm2 = 0.0;
  for (std::size_t m = 1; m <= n; ++m) {
    double t = static_cast<double>(m) / np1;
    t = std::min(t, 1.0 - t);
    double v = 1.0;
    if (t < cosine_fraction / 2)
      v = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * t / cosine_fraction));
    w[m - 1] = v;
    norm2 += v * v;
  }
  const double scale = 1.0 / std::sqrt(norm2);
  for (double& v : w) v *= scale;
  return TaperSet(TaperFamily::tukey, {std::move(w)}, {1.0});
}

// (1/K^2) sum_{k,k'} sum_n |nu_n^(k)|^2 |nu_n^(k')|^2, evaluated as
// sum_n (sum_k mu_k nu_n^(k)^2)^2, which equals the double sum for uniform weights.
inline double quartic_cross_sum(const TaperSet& tapers) {
  double total = 0.0;
  for (std::size_t m = 0; m < tapers.n(); ++m) {
    double s = 0.0;
    for (std::size_t k = 0; k < tapers.k_count(); ++k) {
      const double v = tapers.taper(k)[m];
      s += tapers.weights()[k] * v * v;
    }
    total += s * s;
  }
  return total;
}

struct SpectralWindow {
  std::size_t k = 0;  // 1-based taper index
  ComplexSpectrum window;
};

// V^(k)(f_j) = sum_n nu_n^(k) exp(-2 pi i n f_j); k is 1-based.
inline SpectralWindow spectral_window(const TaperSet& tapers, std::size_t k) {
  if (k < 1 || k > tapers.k_count())
    throw InvalidInput("spectral_window: taper index " + std::to_string(k) + " out of range");
  return {k, dft_grid(tapers.taper(k - 1))};
}

}  // namespace logspec
