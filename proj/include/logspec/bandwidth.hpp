#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "logspec/errors.hpp"
#include "logspec/kernels.hpp"
#include "logspec/multitaper.hpp"
#include "logspec/specmath.hpp"

namespace logspec {

// Mean square residual between a reference log estimate and the smoothed
// input estimate, one value per halfwidth.
struct AsrCurve {
  std::vector<double> halfwidths;
  std::vector<double> values;
};

struct AsrFit {
  double a = 0.0;  // noise level
  double b = 0.0;  // curvature (h^8 coefficient)
  double h_lower = 0.0;
  double h_upper = 0.0;
  double h_opt = 0.0;
  double kernel_norm2 = 0.0;
  double kernel_at_zero = 0.0;
  std::vector<double> h_grid;
  bool clamped = false;     // h_opt moved into [h_lower, h_upper]
  bool degenerate = false;  // a or b was nonpositive and had to be clamped
};

struct HalfwidthBounds {
  double h_lower = 0.0;
  double h_upper = 0.0;
  std::vector<double> grid;
  bool boundary_minimum = false;  // probe minimum at a probe end
};

struct BandwidthProfile {
  double h04 = 0.0;
  double h24 = 0.0;
  double regularizer = 0.0;
  std::vector<double> local;          // h_0(f_j), j = 0..N+1
  std::vector<std::uint8_t> clamped;  // 1 where either clamp bound binds
  std::size_t upper_clamps = 0;
  std::size_t lower_clamps = 0;
};

inline constexpr std::size_t kProbePoints = 30;
inline constexpr double kProbeUpper = 0.45;
inline constexpr std::size_t kFitPoints = 25;
inline constexpr std::size_t kMinFitPoints = 8;

inline AsrCurve asr_curve(const SpectrumEstimate& theta_st, const SpectrumEstimate& theta_mt,
                          const Kernel& kernel04, std::span<const double> h_grid) {
  if (!(theta_st.grid == theta_mt.grid) || theta_st.size() != theta_mt.size())
    throw GridMismatch("asr_curve: estimates live on different grids");
  const auto& grid = theta_st.grid;
  AsrCurve curve;
  curve.halfwidths.assign(h_grid.begin(), h_grid.end());
  curve.values.reserve(h_grid.size());
  for (double h : h_grid) {
    const auto smoothed = smooth(theta_mt, kernel04, h);
    double acc = 0.0;
    for (std::size_t j = 0; j < grid.half_size(); ++j) {
      const double r = theta_st.values[j] - smoothed.values[j];
      acc += r * r;
    }
    curve.values.push_back(acc / static_cast<double>(grid.half_size()));
  }
  return curve;
}

// V(h) = sum_j (mu_j(h) - delta_{0,j})^2 with mu_j the discrete smoothing weights
// on the 2N+2 grid. For large h, V ~ 1 + (||kappa||^2 - 2 kappa(0)) Delta / h.
inline double v_of_h(const Kernel& kernel, double h, std::size_t n) {
  const FrequencyGrid grid(n);
  const auto w = discrete_weights(kernel, h, grid.spacing());
  double v = (w.weights[0] - 1.0) * (w.weights[0] - 1.0);
  for (std::size_t i = 1; i < w.taps(); ++i) v += 2.0 * w.weights[i] * w.weights[i];
  return v;
}

inline double v_of_h_asymptote(const Kernel& kernel, double h, std::size_t n) {
  const FrequencyGrid grid(n);
  return 1.0 + (kernel.norm2() - 2.0 * kernel.at_zero()) * grid.spacing() / h;
}

// 30 log-spaced halfwidths on [10 Delta, 0.45].
inline std::vector<double> probe_grid(std::size_t n, std::size_t points = kProbePoints) {
  const FrequencyGrid grid(n);
  const double lo = 10.0 * grid.spacing();
  const double hi = kProbeUpper;
  std::vector<double> out(points);
  for (std::size_t i = 0; i < points; ++i)
    out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(points - 1));
  return out;
}

// Brackets the probe minimum by the first points where ASR >= 2 ASR_min and
// returns an equispaced fitting grid across the bracket.
inline HalfwidthBounds h_grid_bounds(const AsrCurve& probe, std::size_t points = kFitPoints) {
  if (probe.values.size() < 2 || probe.values.size() != probe.halfwidths.size())
    throw InvalidInput("h_grid_bounds: probe needs at least two points");
  const auto& v = probe.values;
  const std::size_t imin =
      static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
  const double threshold = 2.0 * v[imin];
  std::size_t lo = 0;
  for (std::size_t i = imin; i-- > 0;)
    if (v[i] >= threshold) {
      lo = i;
      break;
    }
  std::size_t hi = v.size() - 1;
  for (std::size_t i = imin + 1; i < v.size(); ++i)
    if (v[i] >= threshold) {
      hi = i;
      break;
    }
  HalfwidthBounds out;
  out.boundary_minimum = imin == 0 || imin == v.size() - 1;
  if (out.boundary_minimum) {
    lo = 0;
    hi = v.size() - 1;
  }
  out.h_lower = probe.halfwidths[lo];
  out.h_upper = probe.halfwidths[hi];
  out.grid.resize(points);
  for (std::size_t i = 0; i < points; ++i)
    out.grid[i] = out.h_lower + (out.h_upper - out.h_lower) * static_cast<double>(i) /
                                    static_cast<double>(points - 1);
  return out;
}

// h_opt = (a ||kappa||^2 / 8b)^{1/9}, the minimizer of the fitted EASE model.
inline double model_optimal_halfwidth(double a, double b, double kernel_norm2) {
  return std::pow(a * kernel_norm2 / (8.0 * b), 1.0 / 9.0);
}

// Unit-weight least squares of ASR(h) against a V(h) + b h^8.
inline AsrFit fit_asr(const AsrCurve& curve, const Kernel& kernel, std::size_t n) {
  const std::size_t m = curve.halfwidths.size();
  if (m < kMinFitPoints || curve.values.size() != m)
    throw FitDegenerate("fit_asr: need at least 8 halfwidths, got " + std::to_string(m));
  AsrFit fit;
  fit.h_grid = curve.halfwidths;
  fit.h_lower = *std::min_element(curve.halfwidths.begin(), curve.halfwidths.end());
  fit.h_upper = *std::max_element(curve.halfwidths.begin(), curve.halfwidths.end());
  fit.kernel_norm2 = kernel.norm2();
  fit.kernel_at_zero = kernel.at_zero();

  // Columns scaled to unit norm, then a two-column Gram-Schmidt QR.
  const double hs = fit.h_upper;
  std::vector<double> c1(m), c2(m);
  for (std::size_t i = 0; i < m; ++i) {
    c1[i] = v_of_h(kernel, curve.halfwidths[i], n);
    c2[i] = std::pow(curve.halfwidths[i] / hs, 8);
  }
  auto dot = [m](const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += x[i] * y[i];
    return s;
  };
  const double s1 = std::sqrt(dot(c1, c1));
  const double s2 = std::sqrt(dot(c2, c2));
  if (!(s1 > 0.0) || !(s2 > 0.0)) throw FitDegenerate("fit_asr: zero design column");
  for (std::size_t i = 0; i < m; ++i) {
    c1[i] /= s1;
    c2[i] /= s2;
  }
  const double r12 = dot(c1, c2);
  std::vector<double> q2(m);
  for (std::size_t i = 0; i < m; ++i) q2[i] = c2[i] - r12 * c1[i];
  const double r22 = std::sqrt(dot(q2, q2));
  if (!(r22 > 1e-14)) throw FitDegenerate("fit_asr: design columns are collinear");
  for (double& x : q2) x /= r22;
  const double y1 = dot(c1, curve.values);
  const double y2 = dot(q2, curve.values);
  const double beta2 = y2 / r22;
  const double beta1 = y1 - r12 * beta2;
  fit.a = beta1 / s1;
  fit.b = beta2 / s2 / std::pow(hs, 8);

  if (fit.b <= 0.0) {
    fit.b = 1e-12;
    fit.h_opt = fit.h_upper;
    fit.degenerate = true;
    return fit;
  }
  if (fit.a <= 0.0) {
    fit.a = 1e-12;
    fit.h_opt = fit.h_lower;
    fit.degenerate = true;
    return fit;
  }
  const double h = model_optimal_halfwidth(fit.a, fit.b, fit.kernel_norm2);
  fit.h_opt = std::clamp(h, fit.h_lower, fit.h_upper);
  fit.clamped = fit.h_opt != h;
  return fit;
}

// N sum_n |nu_n^(1)|^4 for the first sinusoidal taper: 3N / 2(N+1).
inline double sinusoidal_quartic_n(std::size_t n) {
  const double nn = static_cast<double>(n);
  return 3.0 * nn / (2.0 * (nn + 1.0));
}

// H(kappa24, kappa04) of the halfwidth quotient relation; taper_quartic_n is
// N sum_n nu_n^4 of the reference taper.
inline double quotient_factor(const Kernel& k04, const Kernel& k24, double taper_quartic_n) {
  const double b04 = k04.b_p();
  const double b24 = k24.b_p();
  const double kernel_part =
      std::pow(10.0 * b04 * b04 * k24.norm2() / (b24 * b24 * k04.norm2()), 1.0 / 9.0);
  const double taper_part =
      std::pow(std::numbers::pi * std::numbers::pi * taper_quartic_n / 6.0, 1.0 / 9.0);
  return kernel_part * taper_part;
}

inline double quotient_h24(double h04, const Kernel& k04, const Kernel& k24, std::size_t n,
                           double taper_quartic_n) {
  const auto range = admissible_halfwidths(FrequencyGrid(n));
  return std::clamp(quotient_factor(k04, k24, taper_quartic_n) * h04, range.lower, range.upper);
}

inline double quotient_h24(double h04, const Kernel& k04, const Kernel& k24, std::size_t n) {
  return quotient_h24(h04, k04, k24, n, sinusoidal_quartic_n(n));
}

// (K + 1/2) psi'(K) ||kappa||^2: the log-multitaper smoothing variance numerator.
inline double log_variance_constant(std::size_t k_count, const Kernel& kernel) {
  const double k = static_cast<double>(k_count);
  return (k + 0.5) * trigamma(k) * kernel.norm2();
}

// |theta''| level at which the unregularized local halfwidth reaches 2 h04.
inline double local_regularizer(std::size_t k_count, std::size_t n, const Kernel& kernel02,
                                double h04, double c_reg = 1.0) {
  const double b2 = kernel02.b_p();
  const double c = log_variance_constant(k_count, kernel02) /
                   (4.0 * b2 * b2 * static_cast<double>(n));
  return c_reg * std::sqrt(c) / std::pow(2.0 * h04, 2.5);
}

// h_0(f) = [(K+1/2) psi'(K) ||kappa||^2 / (4 B_2^2 N (theta''^2 + delta^2))]^{1/5},
// clamped to [max(2 Delta, K/N), 2 h04].
inline BandwidthProfile local_bandwidth(const SpectrumEstimate& theta2, std::size_t k_count,
                                        std::size_t n, const Kernel& kernel02, double h04,
                                        double c_reg = 1.0) {
  const auto& grid = theta2.grid;
  if (grid.n() != n) throw GridMismatch("local_bandwidth: estimate is not on the N grid");
  const auto range = admissible_halfwidths(grid);
  const double b2 = kernel02.b_p();
  const double numer = log_variance_constant(k_count, kernel02);
  const double denom_scale = 4.0 * b2 * b2 * static_cast<double>(n);
  const double lower = std::max(range.lower, static_cast<double>(k_count) / static_cast<double>(n));
  const double upper = std::clamp(2.0 * h04, lower, range.upper);

  BandwidthProfile prof;
  prof.h04 = h04;
  prof.regularizer = local_regularizer(k_count, n, kernel02, h04, c_reg);
  const double d2 = prof.regularizer * prof.regularizer;
  prof.local.resize(grid.half_size());
  prof.clamped.assign(grid.half_size(), 0);
  for (std::size_t j = 0; j < grid.half_size(); ++j) {
    const double t2 = theta2.values[j];
    const double h = std::pow(numer / (denom_scale * (t2 * t2 + d2)), 0.2);
    double hc = h;
    if (h >= upper * (1.0 - 1e-12)) {
      hc = upper;
      ++prof.upper_clamps;
      prof.clamped[j] = 1;
    } else if (h <= lower * (1.0 + 1e-12)) {
      hc = lower;
      ++prof.lower_clamps;
      prof.clamped[j] = 1;
    }
    prof.local[j] = hc;
  }
  return prof;
}

}  // namespace logspec
