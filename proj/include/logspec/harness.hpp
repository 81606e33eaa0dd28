#pragma once

// Monte Carlo comparison of three log-spectrum smoothers on a moving-average
// model: smoothed log-multitaper, log of the smoothed multitaper spectrum and
// smoothed log single-taper.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "logspec/errors.hpp"
#include "logspec/kernels.hpp"
#include "logspec/multitaper.hpp"
#include "logspec/pipeline.hpp"
#include "logspec/specmath.hpp"
#include "logspec/tapers.hpp"

namespace logspec {

// x_t = sum_i c_i e_{t-i}, c_0 = 1, unit innovation variance.
struct MaModel {
  std::vector<double> coefficients{1.0};

  std::size_t order() const noexcept { return coefficients.size() - 1; }

  static MaModel paper_ma3() { return {{1.0, -0.3, -0.6, 0.3}}; }
};

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Counter-based stream: draw i is a hash of (key, i), key derived from
// (master seed, stream index). Streams are independent of evaluation order.
class CounterRng {
 public:
  CounterRng(std::uint64_t master_seed, std::uint64_t stream)
      : key_(splitmix64(splitmix64(master_seed) ^ (stream * 0xD1B54A32D192ED03ull))) {}

  std::uint64_t next_u64() noexcept { return splitmix64(key_ ^ splitmix64(counter_++)); }

  // Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Box-Muller; the second variate of each pair is cached.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double t = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline std::vector<double> white_noise(std::size_t n, std::uint64_t master_seed, std::uint64_t index) {
  CounterRng rng(master_seed, index);
  std::vector<double> x(n);
  for (double& v : x) v = rng.normal();
  return x;
}

// One stationary realization; `order` presamples of burn-in.
inline std::vector<double> ma_generate(const MaModel& model, std::size_t n,
                                       std::uint64_t master_seed, std::uint64_t index) {
  if (model.coefficients.empty() || model.coefficients.front() != 1.0)
    throw InvalidInput("ma_generate: leading coefficient must be 1");
  const std::size_t q = model.order();
  const auto e = white_noise(n + q, master_seed, index);
  std::vector<double> x(n, 0.0);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t i = 0; i <= q; ++i) x[t] += model.coefficients[i] * e[t + q - i];
  return x;
}

// theta(f_j) = ln |sum_i c_i exp(-2 pi i i f_j)|^2.
inline SpectrumEstimate true_log_spectrum(const MaModel& model, const FrequencyGrid& grid) {
  SpectrumEstimate out{grid, std::vector<double>(grid.size()), Scale::log, EstimatorKind::mt, 0, {}};
  // Rounding leaves |H|^2 near eps^2 sum c^2 at an exact zero.
  double energy = 0.0;
  for (double c : model.coefficients) energy += c * c;
  const double zero_floor = std::max(kMinPower, 1e-24 * energy);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    std::complex<double> h{};
    const double f = grid.frequency(j);
    for (std::size_t i = 0; i < model.coefficients.size(); ++i)
      h += model.coefficients[i] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(i) * f);
    const double s = std::norm(h);
    if (!(s >= zero_floor))
      throw DegenerateSpectrum("true_log_spectrum: transfer function vanishes at frequency " +
                                   std::to_string(f),
                               f);
    out.values[j] = std::log(s);
  }
  return out;
}

// Integrated square error over the full circle, (1/M) sum_j (est - truth)^2.
inline double ise(const SpectrumEstimate& estimate, const SpectrumEstimate& truth) {
  if (!(estimate.grid == truth.grid) || estimate.size() != truth.size())
    throw GridMismatch("ise: estimate and truth live on different grids");
  double acc = 0.0;
  for (std::size_t j = 0; j < estimate.size(); ++j) {
    const double d = estimate.values[j] - truth.values[j];
    acc += d * d;
  }
  return acc / static_cast<double>(estimate.size());
}

enum class Method : int {
  smoothed_log_multitaper = 1,
  log_smoothed_multitaper = 2,
  smoothed_log_single_taper = 3,
};

inline const char* method_name(Method m) {
  switch (m) {
    case Method::smoothed_log_multitaper: return "smoothed log-multitaper";
    case Method::log_smoothed_multitaper: return "log of smoothed multitaper";
    case Method::smoothed_log_single_taper: return "smoothed log-single taper";
  }
  return "?";
}

struct MethodResult {
  Method method = Method::smoothed_log_multitaper;
  double mise = 0.0;
  double max_ise = 0.0;
  std::vector<double> ise;         // NaN for failed realizations
  std::size_t failures = 0;
};

struct SimulationReport {
  std::size_t n = 0;
  std::size_t k_count = 0;
  std::size_t realizations = 0;
  std::uint64_t master_seed = 0;
  std::vector<MethodResult> methods;
  std::vector<std::string> failure_messages;

  const MethodResult* find(Method m) const {
    for (const auto& r : methods)
      if (r.method == m) return &r;
    return nullptr;
  }

  // More than 1% of realizations failed for some method.
  bool failed() const {
    for (const auto& r : methods)
      if (100 * r.failures > realizations) return true;
    return false;
  }
};

struct SimulationOptions {
  std::vector<Method> methods{Method::smoothed_log_multitaper, Method::log_smoothed_multitaper,
                              Method::smoothed_log_single_taper};
  std::size_t threads = 1;
  MaModel model = MaModel::paper_ma3();
  EstimatorConfig config{};
};

// ISE of every requested method on one realization; NaN marks a failure.
inline std::vector<double> run_realization(const SimulationOptions& opt, std::size_t n,
                                           std::uint64_t master_seed, std::uint64_t index,
                                           const SpectrumEstimate& truth, std::string* error = nullptr) {
  std::vector<double> out(opt.methods.size(), std::nan(""));
  const auto x = ma_generate(opt.model, n, master_seed, index);
  const Kernel k02 = make_kernel(0, 2);
  std::optional<AdaptiveResult> mt;
  auto need_mt = [&]() -> const AdaptiveResult& {
    if (!mt) mt = estimate_log_spectrum(x, opt.config);
    return *mt;
  };
  for (std::size_t i = 0; i < opt.methods.size(); ++i) {
    try {
      switch (opt.methods[i]) {
        case Method::smoothed_log_multitaper:
          out[i] = ise(need_mt().estimate, truth);
          break;
        case Method::log_smoothed_multitaper: {
          const auto& r = need_mt();
          auto s = smooth_variable(multitaper_spectrum(x, sinusoidal_tapers(n, r.k_count)), k02,
                                   r.profile.local);
          for (double& v : s.values) {
            if (!(v >= kMinPower)) throw DegenerateSpectrum("smoothed power not positive", 0.0);
            v = std::log(v);
          }
          s.scale = Scale::log;
          out[i] = ise(s, truth);
          break;
        }
        case Method::smoothed_log_single_taper: {
          EstimatorConfig cfg = opt.config;
          cfg.k_count = 1;
          out[i] = ise(estimate_log_spectrum(x, cfg).estimate, truth);
          break;
        }
      }
    } catch (const std::exception& e) {
      if (error) *error = e.what();
    }
  }
  return out;
}

inline SimulationReport run_table1(std::size_t n, std::size_t realizations, std::uint64_t master_seed,
                                   const SimulationOptions& opt = {}) {
  if (opt.methods.empty()) throw InvalidInput("run_table1: no methods requested");
  SimulationReport rep;
  rep.n = n;
  rep.k_count = resolve_k(opt.config, n);
  rep.realizations = realizations;
  rep.master_seed = master_seed;
  const auto truth = true_log_spectrum(opt.model, FrequencyGrid(n));

  std::vector<std::vector<double>> results(realizations);
  std::vector<std::string> errors(realizations);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < realizations;)
      results[i] = run_realization(opt, n, master_seed, i, truth, &errors[i]);
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(opt.threads, realizations));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (std::size_t m = 0; m < opt.methods.size(); ++m) {
    MethodResult mr;
    mr.method = opt.methods[m];
    mr.ise.resize(realizations);
    double sum = 0.0;
    std::size_t ok = 0;
    for (std::size_t i = 0; i < realizations; ++i) {
      const double v = results[i][m];
      mr.ise[i] = v;
      if (std::isnan(v)) {
        ++mr.failures;
        continue;
      }
      sum += v;
      ++ok;
      mr.max_ise = std::max(mr.max_ise, v);
    }
    mr.mise = ok ? sum / static_cast<double>(ok) : std::nan("");
    rep.methods.push_back(std::move(mr));
  }
  for (std::size_t i = 0; i < realizations; ++i)
    if (!errors[i].empty()) rep.failure_messages.push_back("realization " + std::to_string(i) + ": " + errors[i]);
  return rep;
}

}  // namespace logspec
