#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "logspec/bandwidth.hpp"
#include "logspec/errors.hpp"
#include "logspec/harness.hpp"
#include "logspec/pipeline.hpp"

using namespace logspec;

namespace {

SpectrumEstimate filled(std::size_t n, const std::function<double(std::size_t)>& f) {
  const FrequencyGrid g(n);
  SpectrumEstimate e{g, std::vector<double>(g.size()), Scale::log, EstimatorKind::mt, 1, {}};
  for (std::size_t j = 0; j < g.half_size(); ++j) e.values[j] = f(j);
  for (std::size_t j = g.half_size(); j < g.size(); ++j) e.values[j] = e.values[g.size() - j];
  return e;
}

AsrCurve model_curve(double a, double b, std::size_t n, std::span<const double> hs) {
  const auto k04 = make_kernel(0, 4);
  AsrCurve c;
  for (double h : hs) {
    c.halfwidths.push_back(h);
    c.values.push_back(a * v_of_h(k04, h, n) + b * std::pow(h, 8));
  }
  return c;
}

std::vector<double> linspace(double lo, double hi, std::size_t m) {
  std::vector<double> v(m);
  for (std::size_t i = 0; i < m; ++i) v[i] = lo + (hi - lo) * i / (m - 1.0);
  return v;
}

double simpson(const std::function<double(double)>& f, int panels = 4000) {
  const double h = 2.0 / panels;
  double s = f(-1.0) + f(1.0);
  for (int i = 1; i < panels; ++i) s += f(-1.0 + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1.0);
  const auto i = static_cast<std::size_t>(pos);
  return i + 1 < v.size() ? v[i] + (pos - i) * (v[i + 1] - v[i]) : v[i];
}

}  // namespace

TEST(AsrCurve, ZeroForIdenticalConstants) {
  const auto c = filled(128, [](std::size_t) { return 0.7; });
  const auto curve = asr_curve(c, c, make_kernel(0, 4), probe_grid(128));
  for (double v : curve.values) EXPECT_NEAR(v, 0.0, 1e-24);
}

TEST(AsrCurve, ReferenceVarianceWhenSmoothingZero) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> d;
  const auto st = filled(1024, [&](std::size_t) { return d(gen); });
  const auto mt = filled(1024, [](std::size_t) { return 0.0; });
  const auto curve = asr_curve(st, mt, make_kernel(0, 4), probe_grid(1024));
  for (double v : curve.values) EXPECT_NEAR(v, 1.0, 0.15);
}

TEST(AsrCurve, GridMismatchRejected) {
  const auto a = filled(64, [](std::size_t) { return 0.0; });
  const auto b = filled(65, [](std::size_t) { return 0.0; });
  EXPECT_THROW(asr_curve(a, b, make_kernel(0, 4), probe_grid(64)), GridMismatch);
}

TEST(AsrCurve, UShapedOnMovingAverage) {
  const std::size_t n = 128;
  const auto x = ma_generate(MaModel::paper_ma3(), n, 12, 0);
  const auto st = single_taper_log(x);
  const auto mt = log_multitaper(x, sinusoidal_tapers(n, 9));
  const auto curve = asr_curve(st, mt, make_kernel(0, 4), probe_grid(n));
  const auto it = std::min_element(curve.values.begin(), curve.values.end());
  EXPECT_GT(curve.values.front(), *it);
  EXPECT_GT(curve.values.back(), *it);
  for (double v : curve.values) EXPECT_TRUE(std::isfinite(v) && v >= 0.0);
}

TEST(VofH, OnePointKernelGivesZero) {
  const double d = FrequencyGrid(128).spacing();
  EXPECT_NEAR(v_of_h(make_kernel(0, 4), d, 128), 0.0, 1e-15);
  EXPECT_NEAR(v_of_h(make_kernel(0, 2), d, 128), 0.0, 1e-15);
}

TEST(VofH, LargeBandwidthAsymptote) {
  const auto k = make_kernel(0, 4);
  const double exact = v_of_h(k, 0.1, 1024);
  const double asym = v_of_h_asymptote(k, 0.1, 1024);
  EXPECT_NEAR(asym, 1.0 + (1.25 - 2.0 * 45.0 / 32.0) / (2050.0 * 0.1), 1e-14);
  EXPECT_NEAR(exact / asym, 1.0, 0.05);
}

TEST(VofH, MonotoneTowardOne) {
  // ||kappa||^2 < 2 kappa(0) for the adopted kernels, so V rises to 1 from below.
  const auto k = make_kernel(0, 4);
  double prev = -1.0;
  for (double h = 0.01; h <= 0.3; h += 0.005) {
    const double v = v_of_h(k, h, 128);
    EXPECT_GT(v, prev) << h;
    EXPECT_LT(v, 1.0);
    prev = v;
  }
}

TEST(FitAsr, RecoversSyntheticModel) {
  const auto hs = linspace(0.05, 0.45, 25);
  const auto fit = fit_asr(model_curve(1.645, 50.0, 128, hs), make_kernel(0, 4), 128);
  EXPECT_NEAR(fit.a / 1.645, 1.0, 1e-8);
  EXPECT_NEAR(fit.b / 50.0, 1.0, 1e-8);
  const double unclamped = model_optimal_halfwidth(fit.a, fit.b, 1.25);
  EXPECT_NEAR(unclamped, std::pow(1.645 * 1.25 / 400.0, 1.0 / 9.0), 1e-9);
  EXPECT_NEAR(unclamped, 0.556761, 1e-6);
  EXPECT_NEAR(fit.h_opt, 0.45, 1e-15);
  EXPECT_TRUE(fit.clamped);
  EXPECT_FALSE(fit.degenerate);
  EXPECT_EQ(fit.kernel_norm2, 1.25);
  EXPECT_EQ(fit.kernel_at_zero, 45.0 / 32.0);
}

TEST(FitAsr, ClosedFormOptimum) {
  EXPECT_NEAR(model_optimal_halfwidth(1.0, 1.0, 1.25), 0.8136, 1e-4);
  EXPECT_NEAR(model_optimal_halfwidth(1.0, 1.0, 1.25), std::pow(0.15625, 1.0 / 9.0), 1e-15);
}

TEST(FitAsr, RandomParameterRecovery) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> la(std::log(0.05), std::log(20.0)), lb(std::log(0.1), std::log(1e6));
  for (int trial = 0; trial < 50; ++trial) {
    const double a = std::exp(la(gen)), b = std::exp(lb(gen));
    const auto hs = linspace(0.02, 0.4, 25);
    const auto fit = fit_asr(model_curve(a, b, 256, hs), make_kernel(0, 4), 256);
    EXPECT_NEAR(fit.a / a, 1.0, 1e-8);
    EXPECT_NEAR(fit.b / b, 1.0, 1e-8);
    const double h = model_optimal_halfwidth(a, b, 1.25);
    EXPECT_NEAR(fit.h_opt, std::clamp(h, 0.02, 0.4), 1e-8);
  }
}

TEST(FitAsr, TooFewPoints) {
  const auto hs = linspace(0.05, 0.3, 7);
  EXPECT_THROW(fit_asr(model_curve(1.0, 1.0, 128, hs), make_kernel(0, 4), 128), FitDegenerate);
}

TEST(FitAsr, NonpositiveCurvatureClampsToUpper) {
  const auto hs = linspace(0.05, 0.3, 12);
  const auto fit = fit_asr(model_curve(1.0, -3.0, 128, hs), make_kernel(0, 4), 128);
  EXPECT_TRUE(fit.degenerate);
  EXPECT_EQ(fit.b, 1e-12);
  EXPECT_EQ(fit.h_opt, 0.3);
}

TEST(FitAsr, InvariantToCommonShift) {
  const std::size_t n = 256;
  const auto x = ma_generate(MaModel::paper_ma3(), n, 13, 0);
  auto st = single_taper_log(x);
  auto mt = log_multitaper(x, sinusoidal_tapers(n, 12));
  const auto k04 = make_kernel(0, 4);
  const auto hs = linspace(0.03, 0.3, 25);
  const auto f1 = fit_asr(asr_curve(st, mt, k04, hs), k04, n);
  for (double& v : st.values) v += 4.2;
  for (double& v : mt.values) v += 4.2;
  const auto f2 = fit_asr(asr_curve(st, mt, k04, hs), k04, n);
  EXPECT_NEAR(f1.h_opt, f2.h_opt, 1e-9);
}

TEST(FitAsr, MoreStableThanRawArgmin) {
  const std::size_t n = 1024;
  std::vector<double> fitted, raw;
  for (std::size_t r = 0; r < 100; ++r) {
    const auto res = estimate_log_spectrum(ma_generate(MaModel::paper_ma3(), n, 14, r));
    fitted.push_back(res.fit.h_opt);
    const auto& c = res.curve;
    raw.push_back(c.halfwidths[std::min_element(c.values.begin(), c.values.end()) - c.values.begin()]);
  }
  const double iqr_fit = quantile(fitted, 0.75) - quantile(fitted, 0.25);
  const double iqr_raw = quantile(raw, 0.75) - quantile(raw, 0.25);
  EXPECT_LE(iqr_fit, 0.5 * iqr_raw) << iqr_fit << " vs " << iqr_raw;
}

TEST(HGridBounds, BracketsModelMinimizer) {
  // V rises toward 1, so with a > 0 the minimizer of a V + b h^8 sits on the
  // probe floor; with a < 0 it is interior. Dense search is the oracle.
  const std::size_t n = 128;
  const auto hs = probe_grid(n);
  for (double a : {1.645, -1.645}) {
    const auto b = h_grid_bounds(model_curve(a, 5000.0, n, hs));
    double best_h = 0.0, best = 1e300;
    for (double h = hs.front(); h <= hs.back(); h += 1e-4) {
      const double v = a * v_of_h(make_kernel(0, 4), h, n) + 5000.0 * std::pow(h, 8);
      if (v < best) best = v, best_h = h;
    }
    EXPECT_LE(b.h_lower, best_h) << a;
    EXPECT_GE(b.h_upper, best_h) << a;
    EXPECT_EQ(b.boundary_minimum, a > 0.0) << a << " minimizer " << best_h;
    if (a < 0.0) {
      EXPECT_GT(best_h, hs.front());
      EXPECT_LT(best_h, hs.back());
    }
    EXPECT_EQ(b.grid.size(), 25u);
  }
}

TEST(HGridBounds, MonotoneFallsBackToProbeEnds) {
  AsrCurve probe;
  probe.halfwidths = probe_grid(128);
  for (std::size_t i = 0; i < probe.halfwidths.size(); ++i) probe.values.push_back(10.0 - i);
  const auto b = h_grid_bounds(probe);
  EXPECT_TRUE(b.boundary_minimum);
  EXPECT_EQ(b.h_lower, probe.halfwidths.front());
  EXPECT_EQ(b.h_upper, probe.halfwidths.back());
}

TEST(HGridBounds, StructureOnMovingAverage) {
  const std::size_t n = 128;
  const auto res = estimate_log_spectrum(ma_generate(MaModel::paper_ma3(), n, 15, 0));
  const auto& g = res.bounds.grid;
  ASSERT_EQ(g.size(), 25u);
  const auto range = admissible_halfwidths(FrequencyGrid(n));
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i) {
      EXPECT_GT(g[i], g[i - 1]);
    }
    EXPECT_GE(g[i], range.lower);
    EXPECT_LE(g[i], range.upper);
  }
}

TEST(ProbeGrid, LogSpacedEnds) {
  const auto p = probe_grid(128);
  ASSERT_EQ(p.size(), 30u);
  EXPECT_NEAR(p.front(), 10.0 / 258.0, 1e-15);
  EXPECT_NEAR(p.back(), 0.45, 1e-15);
  for (std::size_t i = 2; i < p.size(); ++i) EXPECT_NEAR(p[i] / p[i - 1], p[1] / p[0], 1e-12);
}

TEST(QuotientRelation, FactorValues) {
  const auto k04 = make_kernel(0, 4), k24 = make_kernel(2, 4);
  const double kernel_part = std::pow(10.0 * std::pow(1.0 / 504.0, 2) * 35.0 / (std::pow(1.0 / 18.0, 2) * 1.25), 1.0 / 9.0);
  const double taper_part = std::pow(std::numbers::pi * std::numbers::pi * 128.0 * 3.0 / (2.0 * 129.0) / 6.0, 1.0 / 9.0);
  EXPECT_NEAR(kernel_part, 0.8919, 1e-4);
  EXPECT_NEAR(taper_part, 1.1046, 1e-4);
  const double h = quotient_h24(0.1, k04, k24, 128) / 0.1;
  EXPECT_NEAR(h, 0.9852, 1e-4);
  EXPECT_NEAR(h, kernel_part * taper_part, 1e-12);
  EXPECT_NEAR(std::pow(std::numbers::pi * std::numbers::pi * 1.5 / 6.0, 1.0 / 9.0), 1.1056, 1e-4);
  EXPECT_NEAR(sinusoidal_quartic_n(1 << 20), 1.5, 2e-6);
}

TEST(QuotientRelation, MatchesRawIntegrals) {
  const auto k04 = make_kernel(0, 4), k24 = make_kernel(2, 4);
  auto b4 = [](const Kernel& k) { return simpson([&](double x) { return std::pow(x, 4) * k(x); }) / 24.0; };
  auto l2 = [](const Kernel& k) { return simpson([&](double x) { return k(x) * k(x); }); };
  for (std::size_t n : {64u, 128u, 1024u}) {
    const double oracle = std::pow(10.0 * b4(k04) * b4(k04) * l2(k24) / (b4(k24) * b4(k24) * l2(k04)), 1.0 / 9.0) *
                          std::pow(std::numbers::pi * std::numbers::pi * 3.0 * n / (2.0 * (n + 1.0)) / 6.0, 1.0 / 9.0);
    EXPECT_NEAR(quotient_factor(k04, k24, sinusoidal_quartic_n(n)), oracle, 1e-10);
  }
}

TEST(QuotientRelation, LinearInH04) {
  const auto k04 = make_kernel(0, 4), k24 = make_kernel(2, 4);
  for (double h : {0.02, 0.05, 0.1, 0.2})
    EXPECT_EQ(quotient_h24(2.0 * h, k04, k24, 128) / quotient_h24(h, k04, k24, 128), 2.0);
  EXPECT_EQ(quotient_h24(0.6, k04, k24, 128), 0.5);
}

TEST(LocalBandwidth, ClosedFormValue) {
  const std::size_t n = 128, k = 9;
  const auto theta2 = filled(n, [](std::size_t) { return 10.0; });
  const auto p = local_bandwidth(theta2, k, n, make_kernel(0, 2), 0.25, 0.0);
  const double oracle = std::pow(9.5 * trigamma(9.0) * 0.6 / (4.0 * 0.01 * 128.0 * 100.0), 0.2);
  EXPECT_NEAR(oracle, 0.265, 5e-4);
  for (double h : p.local) EXPECT_NEAR(h, oracle, 1e-12);
  EXPECT_EQ(p.upper_clamps + p.lower_clamps, 0u);
}

TEST(LocalBandwidth, FlatCurvatureHitsUpperClamp) {
  const auto theta2 = filled(128, [](std::size_t) { return 0.0; });
  const auto p = local_bandwidth(theta2, 9, 128, make_kernel(0, 2), 0.1);
  for (std::size_t j = 0; j < p.local.size(); ++j) {
    EXPECT_NEAR(p.local[j], 0.2, 1e-15);
    EXPECT_EQ(p.clamped[j], 1);
  }
  EXPECT_EQ(p.upper_clamps, p.local.size());
}

TEST(LocalBandwidth, PowerLawScaling) {
  const auto a = filled(128, [](std::size_t) { return 40.0; });
  const auto b = filled(128, [](std::size_t) { return -80.0; });
  const auto k02 = make_kernel(0, 2);
  const auto pa = local_bandwidth(a, 9, 128, k02, 0.25, 0.0);
  const auto pb = local_bandwidth(b, 9, 128, k02, 0.25, 0.0);
  EXPECT_NEAR(pb.local[5] / pa.local[5], std::pow(2.0, -0.4), 1e-12);
  EXPECT_NEAR(std::pow(2.0, -0.4), 0.7579, 1e-4);
}

TEST(LocalBandwidth, MonotoneInCurvatureAndAdmissible) {
  const std::size_t n = 256;
  const auto theta2 = filled(n, [](std::size_t j) { return 0.5 * j * j; });
  const auto p = local_bandwidth(theta2, 12, n, make_kernel(0, 2), 0.15);
  const auto range = admissible_halfwidths(FrequencyGrid(n));
  for (std::size_t j = 0; j < p.local.size(); ++j) {
    if (j) {
      EXPECT_LE(p.local[j], p.local[j - 1]);
    }
    EXPECT_GE(p.local[j], std::max(range.lower, 12.0 / n));
    EXPECT_LE(p.local[j], 0.3);
  }
  EXPECT_GT(p.lower_clamps, 0u);
  EXPECT_NEAR(p.local.back(), 12.0 / n, 1e-15);
}

TEST(LocalBandwidth, RegularizerMatchesCap) {
  // At |theta''| = delta with no other regularization the formula gives 2 h04.
  const std::size_t n = 512, k = 16;
  const auto k02 = make_kernel(0, 2);
  const double h04 = 0.08;
  const double delta = local_regularizer(k, n, k02, h04);
  const auto t = filled(n, [&](std::size_t) { return delta; });
  const auto p = local_bandwidth(t, k, n, k02, h04, 0.0);
  EXPECT_NEAR(p.local[3], 2.0 * h04, 1e-12);
}
