#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "logspec/errors.hpp"
#include "logspec/multitaper.hpp"
#include "logspec/specmath.hpp"

namespace logspec {

// Polynomial kernel of order (q, p) on [-1, 1]:
//   int x^m kappa(x) dx = m! delta_{m,q},  m = 0..p-1.
class Kernel {
 public:
  // `coefficients` in the power basis: kappa(x) = sum_i c_i x^i.
  Kernel(int q, int p, std::vector<double> coefficients)
      : q_(q), p_(p), coeffs_(std::move(coefficients)) {}

  int q() const noexcept { return q_; }
  int p() const noexcept { return p_; }
  const std::vector<double>& coefficients() const noexcept { return coeffs_; }

  double operator()(double x) const noexcept {
    if (x < -1.0 || x > 1.0) return 0.0;
    double v = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) v = v * x + *it;
    return v;
  }

  // int_{-1}^{1} x^m kappa(x) dx, exact.
  double moment(int m) const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) s += coeffs_[i] * monomial_integral(m + static_cast<int>(i));
    return s;
  }

  // B_p = p-th moment / p!.
  double b_p() const noexcept { return moment(p_) / factorial(p_); }

  // ||kappa||^2 = int kappa^2.
  double norm2() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
      for (std::size_t j = 0; j < coeffs_.size(); ++j)
        s += coeffs_[i] * coeffs_[j] * monomial_integral(static_cast<int>(i + j));
    return s;
  }

  double at_zero() const noexcept { return coeffs_.empty() ? 0.0 : coeffs_.front(); }

  static double factorial(int m) noexcept {
    double f = 1.0;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
  }

 private:
  static double monomial_integral(int n) noexcept {
    return n % 2 == 1 ? 0.0 : 2.0 / (n + 1);
  }

  int q_;
  int p_;
  std::vector<double> coeffs_;
};

// Minimum-variance polynomial kernels for (q,p) in {(0,2), (0,4), (2,4)}.
inline Kernel make_kernel(int q, int p) {
  if (q == 0 && p == 2) return Kernel(0, 2, {0.75, 0.0, -0.75});
  if (q == 0 && p == 4) {
    constexpr double c = 15.0 / 32.0;
    return Kernel(0, 4, {3 * c, 0.0, -10 * c, 0.0, 7 * c});
  }
  if (q == 2 && p == 4) {
    constexpr double c = 105.0 / 16.0;
    return Kernel(2, 4, {-c, 0.0, 6 * c, 0.0, -5 * c});
  }
  throw InvalidInput("make_kernel: unsupported order (" + std::to_string(q) + "," +
                     std::to_string(p) + ")");
}

struct HalfwidthInterval {
  double lower;
  double upper;
};

// [2 Delta, 1/2]: at least two grid points inside the support.
inline HalfwidthInterval admissible_halfwidths(const FrequencyGrid& grid) {
  return {2.0 * grid.spacing(), 0.5};
}

// Symmetric discrete weights w_i, i = 0..L, applied as
//   out(f_j) = w_0 v_j + sum_{i>=1} w_i (v_{j+i} + v_{j-i}),
// yielding the q-th derivative. The raw weights kappa(i Delta/h) Delta/h^{q+1}
// are corrected so the discrete moments m = 0 (and m = 2 when p = 4) hold exactly.
struct DiscreteKernelWeights {
  double h = 0.0;
  double spacing = 0.0;
  int q = 0;
  std::vector<double> weights;

  std::size_t taps() const noexcept { return weights.size(); }

  // sum_i (i Delta)^m w_i over the full symmetric support.
  double moment(int m) const noexcept {
    double s = m == 0 ? weights[0] : 0.0;
    if (m % 2 == 1) return 0.0;
    for (std::size_t i = 1; i < weights.size(); ++i)
      s += 2.0 * std::pow(static_cast<double>(i) * spacing, m) * weights[i];
    return s;
  }
};

inline DiscreteKernelWeights discrete_weights(const Kernel& kernel, double h, double spacing) {
  const double ratio = spacing / h;
  auto last = static_cast<std::size_t>(std::floor(h / spacing + 1e-12));
  DiscreteKernelWeights out{h, spacing, kernel.q(), std::vector<double>(last + 1)};
  // Work in the scaled variable u_i = i Delta / h; rescale by h^-q at the end.
  std::vector<double> u(last + 1);
  for (std::size_t i = 0; i <= last; ++i) {
    u[i] = static_cast<double>(i) * ratio;
    out.weights[i] = kernel(u[i]) * ratio;
  }
  auto sym_sum = [&](auto&& term) {
    double s = term(0);
    for (std::size_t i = 1; i <= last; ++i) s += 2.0 * term(i);
    return s;
  };
  const double target0 = kernel.q() == 0 ? 1.0 : 0.0;
  const bool two_conditions = kernel.p() >= 4 && last >= 2;
  if (!two_conditions) {
    if (kernel.q() != 0) throw InvalidHalfwidth(h, 2.0 * spacing, 0.5);
    const double s0 = sym_sum([&](std::size_t i) { return out.weights[i]; });
    if (s0 <= 0.0) {
      std::fill(out.weights.begin(), out.weights.end(), 0.0);
      out.weights[0] = 1.0;
    } else {
      for (double& w : out.weights) w /= s0;
    }
    return out;
  }
  // Additive correction (alpha + beta u^2) g(u), g the Epanechnikov shape,
  // fixes sum w = target0 and sum u^2 w = 2 delta_{q,2}.
  const double target2 = kernel.q() == 2 ? 2.0 : 0.0;
  std::vector<double> g(last + 1);
  for (std::size_t i = 0; i <= last; ++i) g[i] = 0.75 * (1.0 - u[i] * u[i]) * ratio;
  const double r0 = target0 - sym_sum([&](std::size_t i) { return out.weights[i]; });
  const double r2 = target2 - sym_sum([&](std::size_t i) { return out.weights[i] * u[i] * u[i]; });
  const double g0 = sym_sum([&](std::size_t i) { return g[i]; });
  const double g2 = sym_sum([&](std::size_t i) { return g[i] * u[i] * u[i]; });
  const double g4 = sym_sum([&](std::size_t i) { return g[i] * std::pow(u[i], 4); });
  const double det = g0 * g4 - g2 * g2;
  const double alpha = (r0 * g4 - r2 * g2) / det;
  const double beta = (g0 * r2 - g2 * r0) / det;
  const double hq = std::pow(h, kernel.q());
  for (std::size_t i = 0; i <= last; ++i)
    out.weights[i] = (out.weights[i] + (alpha + beta * u[i] * u[i]) * g[i]) / hq;
  return out;
}

namespace detail {

inline double apply_weights(const std::vector<double>& v, const FrequencyGrid& grid,
                            const DiscreteKernelWeights& w, std::size_t j) {
  const auto jj = static_cast<std::ptrdiff_t>(j);
  double s = w.weights[0] * v[j];
  for (std::size_t i = 1; i < w.taps(); ++i) {
    const auto ii = static_cast<std::ptrdiff_t>(i);
    s += w.weights[i] * (v[grid.fold(jj + ii)] + v[grid.fold(jj - ii)]);
  }
  return s;
}

inline void mirror_half(std::vector<double>& v, const FrequencyGrid& grid) {
  for (std::size_t j = grid.n() + 2; j < grid.size(); ++j) v[j] = v[grid.size() - j];
}

}  // namespace detail

// Kernel smoothing with fixed halfwidth h. The estimate is extended by even
// reflection at f = 0 and f = 1/2; the output is the q-th derivative.
inline SpectrumEstimate smooth(const SpectrumEstimate& estimate, const Kernel& kernel, double h) {
  const auto range = admissible_halfwidths(estimate.grid);
  if (!(h >= range.lower * (1 - 1e-12) && h <= range.upper))
    throw InvalidHalfwidth(h, range.lower, range.upper);
  const auto w = discrete_weights(kernel, h, estimate.grid.spacing());
  SpectrumEstimate out = estimate;
  out.kind = EstimatorKind::smoothed;
  for (std::size_t j = 0; j < estimate.grid.half_size(); ++j)
    out.values[j] = detail::apply_weights(estimate.values, estimate.grid, w, j);
  detail::mirror_half(out.values, out.grid);
  return out;
}

// Variable-halfwidth smoothing: h_profile[j] applies at grid point j of the
// half [0, 1/2] (a full-circle profile is accepted and read on that half).
inline SpectrumEstimate smooth_variable(const SpectrumEstimate& estimate, const Kernel& kernel,
                                        std::span<const double> h_profile) {
  const auto& grid = estimate.grid;
  if (h_profile.size() != grid.half_size() && h_profile.size() != grid.size())
    throw GridMismatch("smooth_variable: profile length does not match the grid");
  const auto range = admissible_halfwidths(grid);
  for (std::size_t j = 0; j < grid.half_size(); ++j)
    if (!(h_profile[j] >= range.lower * (1 - 1e-12) && h_profile[j] <= range.upper))
      throw InvalidHalfwidth(h_profile[j], range.lower, range.upper, j);
  SpectrumEstimate out = estimate;
  out.kind = EstimatorKind::smoothed;
  for (std::size_t j = 0; j < grid.half_size(); ++j) {
    const auto w = discrete_weights(kernel, h_profile[j], grid.spacing());
    out.values[j] = detail::apply_weights(estimate.values, grid, w, j);
  }
  detail::mirror_half(out.values, grid);
  return out;
}

}  // namespace logspec
