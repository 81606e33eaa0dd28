#pragma once

// Closed-form asymptotics of the smoothed log-multitaper estimator.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>

#include "logspec/errors.hpp"
#include "logspec/kernels.hpp"
#include "logspec/specmath.hpp"

namespace logspec::theory {

struct AsymptoticInputs {
  std::size_t n = 0;
  std::size_t k_count = 1;
  int q = 0;
  int p = 2;
  double b_p = 0.0;
  double kernel_norm2 = 0.0;
  double dp_theta = 0.0;          // d^p theta / df^p
  double dq_curvature = 0.0;      // d^q [theta'' + theta'^2]

  static AsymptoticInputs from_kernel(const Kernel& kernel, std::size_t n, std::size_t k_count,
                                      double dp_theta, double dq_curvature) {
    return {n, k_count, kernel.q(), kernel.p(), kernel.b_p(), kernel.norm2(), dp_theta,
            dq_curvature};
  }
};

struct Ease {
  double bias2 = 0.0;
  double variance = 0.0;
  double total = 0.0;
};

// Local multitaper bias [theta'' + theta'^2] K^2 / 24 N^2 of the log estimate
// (S''(f) K^2 / 24 N^2 on the power scale).
inline double mt_bias(double curvature, std::size_t k_count, std::size_t n) {
  const double k = static_cast<double>(k_count);
  const double nn = static_cast<double>(n);
  return curvature * k * k / (24.0 * nn * nn);
}

inline double log_variance_factor(std::size_t k_count) {
  const double k = static_cast<double>(k_count);
  return (k + 0.5) * trigamma(k);
}

// Var of the kernel-smoothed log-multitaper estimate:
// (K+1/2) psi'(K) ||kappa||^2 / (N h^{2q+1}).
inline double smoothed_log_variance(std::size_t k_count, double kernel_norm2, std::size_t n,
                                    double h, int q = 0) {
  return log_variance_factor(k_count) * kernel_norm2 /
         (static_cast<double>(n) * std::pow(h, 2 * q + 1));
}

// Var of the kernel-smoothed power estimate for general tapers:
// ||kappa||^2 S^2 / h^{2q+1} * sum_{k,k'} mu_k mu_k' sum_n nu^2 nu'^2.
inline double smoothed_power_variance(double spectrum, double kernel_norm2, double h,
                                      double quartic_cross, int q = 0) {
  return kernel_norm2 * spectrum * spectrum * quartic_cross / std::pow(h, 2 * q + 1);
}

// Sinusoidal-taper specialization: ||kappa||^2 S^2 (1 + 1/2K) / (N h^{2q+1}).
inline double smoothed_power_variance_sinusoidal(double spectrum, double kernel_norm2,
                                                 std::size_t k_count, std::size_t n, double h,
                                                 int q = 0) {
  const double k = static_cast<double>(k_count);
  return kernel_norm2 * spectrum * spectrum * (1.0 + 0.5 / k) /
         (static_cast<double>(n) * std::pow(h, 2 * q + 1));
}

inline Ease ease(double h, const AsymptoticInputs& in) {
  if (!(h > 0.0)) throw InvalidInput("ease: halfwidth must be positive");
  const double bias = in.b_p * in.dp_theta * std::pow(h, in.p - in.q) +
                      mt_bias(in.dq_curvature, in.k_count, in.n);
  Ease e;
  e.bias2 = bias * bias;
  e.variance = smoothed_log_variance(in.k_count, in.kernel_norm2, in.n, h, in.q);
  e.total = e.bias2 + e.variance;
  return e;
}

inline double h_opt(const AsymptoticInputs& in) {
  if (in.b_p * in.dp_theta == 0.0)
    throw DomainError("h_opt: undefined optimum for a vanishing p-th derivative");
  const double qq = in.q, pp = in.p;
  const double ratio = (2 * qq + 1) / (2 * (pp - qq));
  const double num = log_variance_factor(in.k_count) * in.kernel_norm2;
  const double den = in.b_p * in.b_p * static_cast<double>(in.n) * in.dp_theta * in.dp_theta;
  return std::pow(ratio * num / den, 1.0 / (2 * pp + 1));
}

// round((N/2)^{8/15}).
inline std::size_t default_k(std::size_t n) {
  return static_cast<std::size_t>(
      std::max(1.0, std::round(std::pow(static_cast<double>(n) / 2.0, 8.0 / 15.0))));
}

// Solves B_p d^p theta d^q[theta''+theta'^2] K^3 = 6 ||kappa||^2 N h^{-(p+q+1)}
// for K, using the magnitude of the bias product.
inline std::size_t k_opt(const AsymptoticInputs& in, double h) {
  const double prod = std::abs(in.b_p * in.dp_theta * in.dq_curvature);
  if (prod == 0.0 || !(h > 0.0)) return default_k(in.n);
  const double k3 = 6.0 * in.kernel_norm2 * static_cast<double>(in.n) *
                    std::pow(h, -(in.p + in.q + 1)) / prod;
  const double k = std::cbrt(k3);
  // nearest integer, ties up
  return static_cast<std::size_t>(std::max(1.0, std::floor(k + 0.5)));
}

inline double m_qp(int q, int p) {
  const double a = (2.0 * q + 1) / (2.0 * (p - q));
  const double e1 = 2.0 * (p - q) / (2.0 * p + 1);
  const double e2 = (2.0 * q + 1) / (2.0 * p + 1);
  return std::pow(a, e1) + std::pow(1.0 / a, e2);
}

// Leading-order EASE at h_opt (multitaper bias term neglected).
inline double ease_min(const AsymptoticInputs& in) {
  const double pp = in.p, qq = in.q;
  const double v = log_variance_factor(in.k_count) * in.kernel_norm2 / static_cast<double>(in.n);
  return m_qp(in.q, in.p) * std::pow(std::abs(in.b_p * in.dp_theta), 2 * (2 * qq + 1) / (2 * pp + 1)) *
         std::pow(v, 2 * (pp - qq) / (2 * pp + 1));
}

// EASE(best global h) / EASE(variable h) for a (0,2) smoother:
// [int theta''^2]^{1/5} / int |theta''|^{2/5}, integrals as grid means.
inline double degradation_ratio(std::span<const double> theta2_profile) {
  if (theta2_profile.empty()) throw InvalidInput("degradation_ratio: empty profile");
  double sq = 0.0, frac = 0.0;
  for (double v : theta2_profile) {
    sq += v * v;
    frac += std::pow(std::abs(v), 0.4);
  }
  const double m = static_cast<double>(theta2_profile.size());
  if (frac == 0.0) return 1.0;
  return std::pow(sq / m, 0.2) / (frac / m);
}

// EASE reduction (pi^2/6 * N sum nu^4)^{4/5} from multitapering before the log.
inline double improvement_factor(double taper_quartic_n) {
  if (!(taper_quartic_n > 0.0)) throw InvalidInput("improvement_factor: quartic sum must be positive");
  return std::pow(std::numbers::pi * std::numbers::pi * taper_quartic_n / 6.0, 0.8);
}

}  // namespace logspec::theory
