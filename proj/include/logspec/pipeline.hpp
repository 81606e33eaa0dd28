#pragma once

// Multi-stage adaptive estimator of the log-spectrum:
//   0. bias-corrected log-multitaper estimate on the 2N+2 grid;
//   1. ASR curve of (0,4) smooths against the single-taper reference, fitted
//      a V(h) + b h^8 model -> h04, then h24 = H h04;
//   2. theta'' by (2,4) smoothing of the log-multitaper estimate at h24;
//   3. local (0,2) halfwidths from theta'' and variable-halfwidth smoothing.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "logspec/bandwidth.hpp"
#include "logspec/errors.hpp"
#include "logspec/kernels.hpp"
#include "logspec/multitaper.hpp"
#include "logspec/tapers.hpp"
#include "logspec/theory.hpp"

namespace logspec {

enum class ReferenceTaper { sinusoidal_k1, tukey };

struct EstimatorConfig {
  std::optional<std::size_t> k_count;  // nullopt: round((N/2)^{8/15})
  ReferenceTaper reference = ReferenceTaper::sinusoidal_k1;
  double tukey_fraction = kDefaultTukeyFraction;
  double c_reg = 1.0;
  std::size_t probe_points = kProbePoints;
  std::size_t fit_points = kFitPoints;
  std::optional<double> fixed_h;  // bypasses adaptation
  std::uint64_t seed = 0;         // carried for harness bookkeeping only
};

struct AdaptiveResult {
  SpectrumEstimate estimate;  // final theta-hat
  SpectrumEstimate theta_mt;
  SpectrumEstimate theta_st;
  SpectrumEstimate theta2;
  AsrCurve probe;
  HalfwidthBounds bounds;
  AsrCurve curve;
  AsrFit fit;
  BandwidthProfile profile;
  std::size_t k_count = 0;
  std::vector<std::string> warnings;
};

inline constexpr std::size_t kMinPipelineLength = 32;

inline std::size_t resolve_k(const EstimatorConfig& config, std::size_t n) {
  const std::size_t k = config.k_count.value_or(theory::default_k(n));
  if (k < 1 || 4 * k > n)
    throw ConfigurationError("taper count " + std::to_string(k) + " outside [1, N/4] for N = " +
                             std::to_string(n));
  return k;
}

namespace detail {

template <class F>
auto stage(const char* label, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(label, e.what());
  }
}

inline SpectrumEstimate reference_estimate(std::span<const double> series,
                                           const EstimatorConfig& config) {
  if (config.reference == ReferenceTaper::tukey)
    return single_taper_log(series, tukey_taper(series.size(), config.tukey_fraction));
  return single_taper_log(series);
}

inline double reference_quartic_n(std::size_t n, const EstimatorConfig& config) {
  if (config.reference == ReferenceTaper::tukey)
    return static_cast<double>(n) * quartic_cross_sum(tukey_taper(n, config.tukey_fraction));
  return sinusoidal_quartic_n(n);
}

}  // namespace detail

inline AdaptiveResult estimate_log_spectrum(std::span<const double> series,
                                            const EstimatorConfig& config = {}) {
  const std::size_t n = series.size();
  if (n < kMinPipelineLength)
    throw InvalidInput("estimate_log_spectrum: need at least 32 samples, got " + std::to_string(n));
  if (!std::all_of(series.begin(), series.end(), [](double v) { return std::isfinite(v); }))
    throw InvalidInput("estimate_log_spectrum: non-finite sample");
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  if (*lo == *hi) throw InvalidInput("estimate_log_spectrum: constant series has no spectrum to estimate");

  AdaptiveResult r;
  r.k_count = resolve_k(config, n);
  const FrequencyGrid grid(n);
  const Kernel k02 = make_kernel(0, 2);
  const Kernel k04 = make_kernel(0, 4);
  const Kernel k24 = make_kernel(2, 4);

  // Step 0
  r.theta_st = detail::stage("reference estimate", [&] { return detail::reference_estimate(series, config); });
  r.theta_mt = detail::stage("multitaper", [&] {
    if (r.k_count == 1) return r.theta_st;
    return log_multitaper(series, sinusoidal_tapers(n, r.k_count));
  });
  for (const auto& w : r.theta_mt.warnings) r.warnings.push_back(w);

  if (config.fixed_h) {
    const double h = *config.fixed_h;
    r.estimate = detail::stage("fixed smoothing", [&] { return smooth(r.theta_mt, k02, h); });
    r.profile.h04 = h;
    r.profile.h24 = h;
    r.profile.local.assign(grid.half_size(), h);
    r.profile.clamped.assign(grid.half_size(), 0);
    r.theta2 = r.theta_mt;
    std::fill(r.theta2.values.begin(), r.theta2.values.end(), 0.0);
    return r;
  }

  // Step 1a: probe, bracket, ASR on the fitting grid
  detail::stage("ASR", [&] {
    r.probe = asr_curve(r.theta_st, r.theta_mt, k04, probe_grid(n, config.probe_points));
    r.bounds = h_grid_bounds(r.probe, config.fit_points);
    if (r.bounds.boundary_minimum)
      r.warnings.push_back("ASR probe minimum on the probe boundary; bounds default to probe ends");
    r.curve = asr_curve(r.theta_st, r.theta_mt, k04, r.bounds.grid);
    return 0;
  });

  // Step 1b
  r.fit = detail::stage("ASR fit", [&] { return fit_asr(r.curve, k04, n); });
  if (r.fit.degenerate) r.warnings.push_back("ASR fit produced a nonpositive parameter; h04 clamped");
  if (r.fit.clamped) r.warnings.push_back("fitted h04 clamped to the ASR bracket");
  const double quartic = detail::reference_quartic_n(n, config);
  const double h24 = quotient_h24(r.fit.h_opt, k04, k24, n, quartic);

  // Step 2
  r.theta2 = detail::stage("second derivative", [&] { return smooth(r.theta_mt, k24, h24); });

  // Step 3
  r.profile = detail::stage("local bandwidth", [&] {
    return local_bandwidth(r.theta2, r.k_count, n, k02, r.fit.h_opt, config.c_reg);
  });
  r.profile.h24 = h24;
  if (r.profile.upper_clamps > 0)
    r.warnings.push_back("upper halfwidth clamp at " + std::to_string(r.profile.upper_clamps) +
                         " grid points");
  if (r.profile.lower_clamps > 0)
    r.warnings.push_back("lower halfwidth clamp at " + std::to_string(r.profile.lower_clamps) +
                         " grid points");
  r.estimate = detail::stage("variable smoothing",
                             [&] { return smooth_variable(r.theta_mt, k02, r.profile.local); });
  return r;
}

}  // namespace logspec
