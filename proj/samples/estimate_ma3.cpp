// Estimate the log-spectrum of one MA(3) realization and compare with the truth.
// usage: usage_sample [series-output-file]

#include <cstdio>
#include <fstream>

#include "logspec/logspec.hpp"

int main(int argc, char** argv) {
  using namespace logspec;
  constexpr std::size_t n = 512;
  const auto model = MaModel::paper_ma3();
  const auto x = ma_generate(model, n, 2024, 0);

  if (argc > 1) {
    std::ofstream out(argv[1]);
    out.precision(17);
    for (double v : x) out << v << '\n';
  }

  const auto r = estimate_log_spectrum(x);
  const auto truth = true_log_spectrum(model, r.estimate.grid);
  std::printf("N=%zu K=%zu h04=%.4f h24=%.4f ISE=%.4f (single-taper reference ISE=%.4f)\n", n, r.k_count,
              r.fit.h_opt, r.profile.h24, ise(r.estimate, truth), ise(r.theta_st, truth));
  std::printf("%9s %10s %10s %9s\n", "f", "estimate", "truth", "h0(f)");
  for (std::size_t j = 0; j < r.estimate.grid.half_size(); j += 32)
    std::printf("%9.4f %10.4f %10.4f %9.4f\n", r.estimate.grid.frequency(j), r.estimate.values[j], truth.values[j],
                r.profile.local[j]);
  for (const auto& w : r.warnings) std::printf("warning: %s\n", w.c_str());
}
