// logspec: command-line front end for the log-spectrum estimator.

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "logspec/logspec.hpp"

using namespace logspec;

namespace {

// Output stream bound to a file, or stdout for "" / "-".
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw InvalidInput("cannot open " + path + " for writing");
    }
  }
  std::ostream& out() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  const auto e = s.find_last_not_of(" \t\r\"");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(trim(cell));
  return out;
}

std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end) return std::nullopt;
  return v;
}

// Newline-delimited reals, or one column of a CSV file selected by 0-based
// index or header name. A non-numeric first line is taken as a header.
std::vector<double> read_series(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  std::vector<double> x;
  std::optional<std::size_t> col;
  if (!column.empty() && std::all_of(column.begin(), column.end(), ::isdigit)) col = std::stoul(column);
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv(line);
    if (!col && column.empty()) col = 0;
    if (!col) {
      const auto it = std::find(cells.begin(), cells.end(), column);
      if (it == cells.end()) throw InvalidInput("column '" + column + "' not found in header of " + path);
      col = static_cast<std::size_t>(it - cells.begin());
      continue;
    }
    if (*col >= cells.size())
      throw InvalidInput(path + ":" + std::to_string(lineno) + ": missing column " + std::to_string(*col));
    const auto v = parse_double(cells[*col]);
    if (!v) {
      if (x.empty() && lineno == 1) continue;  // header
      throw InvalidInput(path + ":" + std::to_string(lineno) + ": not a number: '" + cells[*col] + "'");
    }
    x.push_back(*v);
  }
  return x;
}

std::optional<std::size_t> parse_k(const std::string& s) {
  if (s.empty() || s == "auto") return std::nullopt;
  const auto v = parse_double(s);
  if (!v || *v < 1 || *v != std::floor(*v)) throw InvalidInput("--n-tapers expects a positive integer or 'auto'");
  return static_cast<std::size_t>(*v);
}

void write_estimate(std::ostream& os, const SpectrumEstimate& est, const BandwidthProfile* prof) {
  os.precision(10);
  if (prof) {
    os << "frequency,log_spectrum,halfwidth,clamped\n";
    for (std::size_t j = 0; j < est.grid.half_size(); ++j)
      os << est.grid.frequency(j) << ',' << est.values[j] << ',' << prof->local[j] << ','
         << static_cast<int>(prof->clamped[j]) << '\n';
  } else {
    os << "frequency,value\n";
    for (std::size_t j = 0; j < est.grid.half_size(); ++j)
      os << est.grid.frequency(j) << ',' << est.values[j] << '\n';
  }
}

void write_asr(const std::string& path, const AdaptiveResult& r, std::size_t n) {
  Sink sink(path);
  auto& os = sink.out();
  os.precision(10);
  const Kernel k04 = make_kernel(0, 4);
  os << "# a=" << r.fit.a << " b=" << r.fit.b << " h_lower=" << r.fit.h_lower << " h_upper=" << r.fit.h_upper
     << " h04=" << r.fit.h_opt << " h24=" << r.profile.h24 << " regularizer=" << r.profile.regularizer
     << " norm2=" << r.fit.kernel_norm2 << " kappa0=" << r.fit.kernel_at_zero << '\n';
  os << "stage,halfwidth,asr,model\n";
  for (std::size_t i = 0; i < r.probe.halfwidths.size(); ++i)
    os << "probe," << r.probe.halfwidths[i] << ',' << r.probe.values[i] << ",\n";
  for (std::size_t i = 0; i < r.curve.halfwidths.size(); ++i) {
    const double h = r.curve.halfwidths[i];
    os << "fit," << h << ',' << r.curve.values[i] << ',' << r.fit.a * v_of_h(k04, h, n) + r.fit.b * std::pow(h, 8)
       << '\n';
  }
}

std::vector<Method> parse_methods(const std::string& s) {
  std::vector<Method> out;
  for (const auto& cell : split_csv(s)) {
    if (cell == "1") out.push_back(Method::smoothed_log_multitaper);
    else if (cell == "2") out.push_back(Method::log_smoothed_multitaper);
    else if (cell == "3") out.push_back(Method::smoothed_log_single_taper);
    else throw InvalidInput("--methods expects a list drawn from 1,2,3");
  }
  if (out.empty()) throw InvalidInput("--methods is empty");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Log-spectrum estimation by sinusoidal multitapering and adaptive kernel smoothing"};
  app.require_subcommand(1);

  // tapers
  auto* tapers_cmd = app.add_subcommand("tapers", "Write a taper set as CSV (m, nu1..nuK)");
  std::size_t t_n = 128;
  std::string t_k = "auto", t_family = "sinusoidal", t_out;
  double t_fraction = kDefaultTukeyFraction;
  tapers_cmd->add_option("--n", t_n, "Series length")->check(CLI::Range(4, 1 << 24));
  tapers_cmd->add_option("--n-tapers,-k", t_k, "Taper count or 'auto'");
  tapers_cmd->add_option("--family", t_family, "sinusoidal or tukey")->check(CLI::IsMember({"sinusoidal", "tukey"}));
  tapers_cmd->add_option("--fraction", t_fraction, "Tukey cosine fraction");
  tapers_cmd->add_option("--output,-o", t_out, "Output file (default stdout)");

  // kernels
  auto* kernels_cmd = app.add_subcommand("kernels", "Print the supported smoothing kernels as CSV");
  std::string k_out;
  kernels_cmd->add_option("--output,-o", k_out, "Output file (default stdout)");

  // theory
  auto* theory_cmd = app.add_subcommand("theory", "Print asymptotic constants for given N and K");
  std::size_t th_n = 128;
  std::string th_k = "auto";
  theory_cmd->add_option("--n", th_n, "Series length")->check(CLI::Range(4, 1 << 24));
  theory_cmd->add_option("--n-tapers,-k", th_k, "Taper count or 'auto'");

  // estimate
  auto* est_cmd = app.add_subcommand("estimate", "Estimate the log-spectrum of a series");
  std::string e_in, e_out, e_k = "auto", e_column, e_asr, e_stage, e_reference = "sine";
  std::uint64_t e_seed = 0;
  std::optional<double> e_fixed;
  double e_fraction = kDefaultTukeyFraction, e_creg = 1.0;
  est_cmd->add_option("--input,-i", e_in, "Input series")->required()->check(CLI::ExistingFile);
  est_cmd->add_option("--output,-o", e_out, "Output CSV (default stdout)");
  est_cmd->add_option("--n-tapers,-k", e_k, "Taper count or 'auto'");
  est_cmd->add_option("--seed", e_seed, "Seed recorded with the run");
  est_cmd->add_option("--column", e_column, "CSV column (0-based index or header name)");
  est_cmd->add_option("--dump-asr", e_asr, "Write the ASR curve and fitted model");
  est_cmd->add_option("--fixed-h", e_fixed, "Fixed halfwidth, bypassing adaptation");
  est_cmd->add_option("--stage", e_stage, "Emit a first-stage estimate instead")
      ->check(CLI::IsMember({"mt", "st", "meanlog"}));
  est_cmd->add_option("--reference", e_reference, "Reference taper for the ASR: sine or tukey")
      ->check(CLI::IsMember({"sine", "tukey"}));
  est_cmd->add_option("--tukey-fraction", e_fraction, "Tukey cosine fraction");
  est_cmd->add_option("--c-reg", e_creg, "Curvature regularization multiplier")->check(CLI::NonNegativeNumber);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo comparison on the MA(3) model");
  std::size_t s_n = 128, s_r = 500, s_threads = std::max(1u, std::thread::hardware_concurrency());
  std::uint64_t s_seed = 1;
  std::string s_out, s_methods = "1,2,3", s_per;
  sim_cmd->add_option("--n", s_n, "Series length")->check(CLI::Range(32, 1 << 20));
  sim_cmd->add_option("--realizations,-r", s_r, "Realization count")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", s_seed, "Master seed");
  sim_cmd->add_option("--output,-o", s_out, "Report CSV (default stdout)");
  sim_cmd->add_option("--methods", s_methods, "Comma-separated subset of 1,2,3");
  sim_cmd->add_option("--per-realization", s_per, "Write per-realization ISE values");
  sim_cmd->add_option("--threads,-j", s_threads, "Worker threads")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*tapers_cmd) {
      const auto k = parse_k(t_k).value_or(theory::default_k(t_n));
      const auto set = t_family == "tukey" ? tukey_taper(t_n, t_fraction) : sinusoidal_tapers(t_n, k);
      Sink sink(t_out);
      auto& os = sink.out();
      os.precision(15);
      os << 'm';
      for (std::size_t i = 1; i <= set.k_count(); ++i) os << ",nu" << i;
      os << '\n';
      for (std::size_t m = 0; m < set.n(); ++m) {
        os << m + 1;
        for (std::size_t i = 0; i < set.k_count(); ++i) os << ',' << set.taper(i)[m];
        os << '\n';
      }
      return 0;
    }

    if (*kernels_cmd) {
      Sink sink(k_out);
      auto& os = sink.out();
      os.precision(15);
      os << "q,p,coefficients,B_p,norm2,kappa0\n";
      for (auto [q, p] : {std::pair{0, 2}, {0, 4}, {2, 4}}) {
        const auto k = make_kernel(q, p);
        os << q << ',' << p << ',';
        for (std::size_t i = 0; i < k.coefficients().size(); ++i) os << (i ? " " : "") << k.coefficients()[i];
        os << ',' << k.b_p() << ',' << k.norm2() << ',' << k.at_zero() << '\n';
      }
      return 0;
    }

    if (*theory_cmd) {
      const auto k = parse_k(th_k).value_or(theory::default_k(th_n));
      const auto k04 = make_kernel(0, 4), k24 = make_kernel(2, 4);
      const double q1 = sinusoidal_quartic_n(th_n);
      std::cout.precision(10);
      std::cout << "quantity,value\n"
                << "N," << th_n << "\nK," << k << "\ndefault_K," << theory::default_k(th_n) << '\n'
                << "M_02," << theory::m_qp(0, 2) << "\nM_04," << theory::m_qp(0, 4) << "\nM_24," << theory::m_qp(2, 4) << '\n';
      for (auto [q, p] : {std::pair{0, 2}, {0, 4}, {2, 4}}) {
        const auto kern = make_kernel(q, p);
        std::cout << "B_" << q << p << ',' << kern.b_p() << "\nnorm2_" << q << p << ',' << kern.norm2() << '\n';
      }
      std::cout << "log_variance_factor," << theory::log_variance_factor(k) << '\n'
                << "quartic_cross_sum," << quartic_cross_sum(sinusoidal_tapers(th_n, k)) << '\n'
                << "single_taper_quartic_N," << q1 << '\n'
                << "improvement_factor," << theory::improvement_factor(q1) << '\n'
                << "quotient_factor_H," << quotient_factor(k04, k24, q1) << '\n';
      return 0;
    }

    if (*est_cmd) {
      const auto x = read_series(e_in, e_column);
      EstimatorConfig cfg;
      cfg.k_count = parse_k(e_k);
      cfg.seed = e_seed;
      cfg.fixed_h = e_fixed;
      cfg.reference = e_reference == "tukey" ? ReferenceTaper::tukey : ReferenceTaper::sinusoidal_k1;
      cfg.tukey_fraction = e_fraction;
      cfg.c_reg = e_creg;
      Sink sink(e_out);
      if (!e_stage.empty()) {
        if (x.size() < 4) throw InvalidInput("need at least 4 samples");
        const auto k = resolve_k(cfg, x.size());
        const auto tap = sinusoidal_tapers(x.size(), k);
        const auto est = e_stage == "mt" ? log_multitaper(x, tap)
                         : e_stage == "st" ? detail::reference_estimate(x, cfg)
                                           : mean_log_single(x, tap);
        write_estimate(sink.out(), est, nullptr);
        return 0;
      }
      const auto r = estimate_log_spectrum(x, cfg);
      write_estimate(sink.out(), r.estimate, &r.profile);
      if (!e_asr.empty() && !e_fixed) write_asr(e_asr, r, x.size());
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      return 0;
    }

    if (*sim_cmd) {
      SimulationOptions opt;
      opt.methods = parse_methods(s_methods);
      opt.threads = s_threads;
      const auto rep = run_table1(s_n, s_r, s_seed, opt);
      Sink sink(s_out);
      auto& os = sink.out();
      os.precision(8);
      os << "method,N,K,realizations,MISE,MaxISE\n";
      for (const auto& m : rep.methods)
        os << static_cast<int>(m.method) << ',' << rep.n << ',' << (m.method == Method::smoothed_log_single_taper ? 1 : rep.k_count)
           << ',' << rep.realizations - m.failures << ',' << m.mise << ',' << m.max_ise << '\n';
      if (!s_per.empty()) {
        Sink per(s_per);
        auto& ps = per.out();
        ps.precision(10);
        ps << "realization";
        for (const auto& m : rep.methods) ps << ",method" << static_cast<int>(m.method);
        ps << '\n';
        for (std::size_t i = 0; i < rep.realizations; ++i) {
          ps << i;
          for (const auto& m : rep.methods) ps << ',' << m.ise[i];
          ps << '\n';
        }
      }
      for (const auto& msg : rep.failure_messages) std::cerr << "failed " << msg << '\n';
      if (rep.failed()) {
        std::cerr << "error: more than 1% of realizations failed\n";
        return 3;
      }
      const auto* m1 = rep.find(Method::smoothed_log_multitaper);
      const auto* m2 = rep.find(Method::log_smoothed_multitaper);
      const auto* m3 = rep.find(Method::smoothed_log_single_taper);
      if (s_r >= 500 && m1 && m2 && m3 && !(m1->mise <= m2->mise && m2->mise < m3->mise)) {
        std::cerr << "error: MISE ordering 1 <= 2 < 3 violated\n";
        return 4;
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
