#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "logspec/errors.hpp"
#include "logspec/specmath.hpp"
#include "logspec/tapers.hpp"

namespace logspec {

enum class Scale { power, log };
enum class EstimatorKind { mt, st, mean_log, smoothed };

// Values over the full 2N+2 grid.
struct SpectrumEstimate {
  FrequencyGrid grid;
  std::vector<double> values;
  Scale scale = Scale::log;
  EstimatorKind kind = EstimatorKind::mt;
  std::size_t k_count = 0;
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t j) const { return values[j]; }
};

// Smallest power accepted before a log is taken.
inline constexpr double kMinPower = 1e-300;

namespace detail {

inline void require_positive(const SpectrumEstimate& s, const char* who) {
  for (std::size_t j = 0; j < s.values.size(); ++j)
    if (!(s.values[j] >= kMinPower))
      throw DegenerateSpectrum(std::string(who) + ": zero power at frequency " +
                                   std::to_string(s.grid.frequency(j)),
                               s.grid.frequency(j));
}

// Delta |zeta(f_j + k Delta) - zeta(f_j - k Delta)|^2, the k-th sinusoidal
// taper periodogram; indices wrap modulo 2N+2.
inline double sine_periodogram(const ComplexSpectrum& z, std::size_t j, std::size_t k) {
  const auto& g = z.grid;
  const auto jj = static_cast<std::ptrdiff_t>(j);
  const auto kk = static_cast<std::ptrdiff_t>(k);
  return g.spacing() * std::norm(z.values[g.wrap(jj + kk)] - z.values[g.wrap(jj - kk)]);
}

inline SpectrumEstimate sinusoidal_fast_path(const ComplexSpectrum& z, const TaperSet& tapers) {
  SpectrumEstimate out{z.grid, std::vector<double>(z.grid.size(), 0.0), Scale::power,
                       EstimatorKind::mt, tapers.k_count(), {}};
  for (std::size_t j = 0; j < z.grid.size(); ++j) {
    double s = 0.0;
    for (std::size_t k = 1; k <= tapers.k_count(); ++k)
      s += tapers.weights()[k - 1] * sine_periodogram(z, j, k);
    out.values[j] = s;
  }
  return out;
}

}  // namespace detail

// Generic quadratic estimate sum_k mu_k |sum_n nu_n^(k) x_n e^{-2 pi i n f}|^2.
inline SpectrumEstimate multitaper_spectrum_generic(std::span<const double> series,
                                                    const TaperSet& tapers) {
  if (series.size() != tapers.n()) throw InvalidInput("multitaper: taper/series length mismatch");
  const FrequencyGrid grid(series.size());
  SpectrumEstimate out{grid, std::vector<double>(grid.size(), 0.0), Scale::power,
                       EstimatorKind::mt, tapers.k_count(), {}};
  std::vector<double> tapered(series.size());
  for (std::size_t k = 0; k < tapers.k_count(); ++k) {
    const auto& nu = tapers.taper(k);
    for (std::size_t m = 0; m < series.size(); ++m) tapered[m] = nu[m] * series[m];
    const auto z = dft_grid(tapered);
    for (std::size_t j = 0; j < grid.size(); ++j)
      out.values[j] += tapers.weights()[k] * std::norm(z.values[j]);
  }
  detail::require_positive(out, "multitaper_spectrum");
  return out;
}

// Power-scale multitaper estimate. Sinusoidal tapers with K < N/2 use the
// difference form Delta sum_k mu_k |zeta(f+k Delta) - zeta(f-k Delta)|^2.
inline SpectrumEstimate multitaper_spectrum(std::span<const double> series,
                                            const TaperSet& tapers) {
  if (series.size() != tapers.n()) throw InvalidInput("multitaper: taper/series length mismatch");
  if (tapers.family() != TaperFamily::sinusoidal) return multitaper_spectrum_generic(series, tapers);
  if (2 * tapers.k_count() >= series.size()) {
    auto out = multitaper_spectrum_generic(series, tapers);
    out.warnings.push_back("K >= N/2: sinusoidal fast path disabled, used generic path");
    return out;
  }
  auto out = detail::sinusoidal_fast_path(dft_grid(series), tapers);
  detail::require_positive(out, "multitaper_spectrum");
  return out;
}

// ln(K) - psi(K): the additive correction that centres ln(chi^2_2K / 2K).
inline double log_bias_correction(std::size_t k_count) {
  const double k = static_cast<double>(k_count);
  return std::log(k) - digamma(k);
}

// theta_mt = ln S_mt - [psi(K) - ln K]. Requires uniform weights.
inline SpectrumEstimate log_multitaper(std::span<const double> series, const TaperSet& tapers) {
  if (!tapers.uniform_weights())
    throw ConfigurationError("log_multitaper: log correction requires uniform taper weights");
  auto s = multitaper_spectrum(series, tapers);
  const double c = log_bias_correction(tapers.k_count());
  for (double& v : s.values) v = std::log(v) + c;
  s.scale = Scale::log;
  return s;
}

// Log of a power estimate, Euler-corrected as a chi^2_2 variable.
inline SpectrumEstimate euler_corrected_log(SpectrumEstimate power, EstimatorKind kind) {
  detail::require_positive(power, "single_taper_log");
  for (double& v : power.values) v = std::log(v) + kEulerGamma;
  power.scale = Scale::log;
  power.kind = kind;
  return power;
}

// ln[|zeta(f+Delta) - zeta(f-Delta)|^2 / 2(N+1)] + gamma.
inline SpectrumEstimate single_taper_log(std::span<const double> series) {
  if (series.size() < 4) throw InvalidInput("single_taper_log: need at least 4 samples");
  const auto z = dft_grid(series);
  SpectrumEstimate p{z.grid, std::vector<double>(z.grid.size()), Scale::power,
                     EstimatorKind::st, 1, {}};
  for (std::size_t j = 0; j < z.grid.size(); ++j) p.values[j] = detail::sine_periodogram(z, j, 1);
  return euler_corrected_log(std::move(p), EstimatorKind::st);
}

// ln |zeta_nu(f)|^2 + gamma with zeta_nu the transform of the tapered series.
inline SpectrumEstimate single_taper_log(std::span<const double> series, const TaperSet& taper) {
  if (taper.k_count() != 1) throw InvalidInput("single_taper_log: expected exactly one taper");
  if (series.size() != taper.n()) throw InvalidInput("single_taper_log: length mismatch");
  std::vector<double> tapered(series.size());
  for (std::size_t m = 0; m < series.size(); ++m) tapered[m] = taper.taper(0)[m] * series[m];
  const auto z = dft_grid(tapered);
  SpectrumEstimate p{z.grid, std::vector<double>(z.grid.size()), Scale::power,
                     EstimatorKind::st, 1, {}};
  for (std::size_t j = 0; j < z.grid.size(); ++j) p.values[j] = std::norm(z.values[j]);
  return euler_corrected_log(std::move(p), EstimatorKind::st);
}

// (1/K) sum_k ln(Delta |zeta(f+k Delta) - zeta(f-k Delta)|^2) + gamma.
inline SpectrumEstimate mean_log_single(std::span<const double> series, const TaperSet& tapers) {
  if (tapers.family() != TaperFamily::sinusoidal)
    throw InvalidInput("mean_log_single: requires sinusoidal tapers");
  if (series.size() != tapers.n()) throw InvalidInput("mean_log_single: length mismatch");
  const auto z = dft_grid(series);
  const std::size_t kc = tapers.k_count();
  SpectrumEstimate out{z.grid, std::vector<double>(z.grid.size(), 0.0), Scale::log,
                       EstimatorKind::mean_log, kc, {}};
  for (std::size_t j = 0; j < z.grid.size(); ++j) {
    double acc = 0.0;
    for (std::size_t k = 1; k <= kc; ++k) {
      const double p = detail::sine_periodogram(z, j, k);
      if (!(p >= kMinPower))
        throw DegenerateSpectrum("mean_log_single: zero power at frequency " +
                                     std::to_string(z.grid.frequency(j)),
                                 z.grid.frequency(j));
      acc += std::log(p);
    }
    out.values[j] = acc / static_cast<double>(kc) + kEulerGamma;
  }
  return out;
}

}  // namespace logspec
