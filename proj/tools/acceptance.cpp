// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit when any
// fail. Output directories land under argv[1] (default "acceptance_out").
// Runtime budgets are part of each criterion and are enforced.
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hpntk/experiments.h"
#include "hpntk/io.h"
#include "hpntk/kernels.h"
#include "hpntk/mc.h"
#include "hpntk/rng.h"
#include "hpntk/simd.h"
#include "hpntk/spectral.h"

namespace {

namespace fs = std::filesystem;
using namespace hpntk;

int g_failures = 0;

// runs one criterion body, times it, prints "criterion N: PASS|FAIL | detail"
void criterion(int idx, double budget_seconds,
               const std::function<std::pair<bool, std::string>()>& body) {
  const auto start = std::chrono::steady_clock::now();
  bool ok = false;
  std::string detail;
  try {
    std::tie(ok, detail) = body();
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (elapsed >= budget_seconds) {
    ok = false;
    detail += " [over budget]";
  }
  std::ostringstream line;
  line.precision(4);
  line << "criterion " << idx << ": " << (ok ? "PASS" : "FAIL") << " | " << detail << " | "
       << elapsed << "s of " << budget_seconds << "s";
  std::cout << line.str() << std::endl;
  if (!ok) ++g_failures;
}

Mat unit_rows(std::size_t n, std::size_t d, std::uint64_t seed, std::uint64_t key) {
  Mat X(n, d);
  rng::Gaussian g(rng::substream(seed, key));
  for (std::size_t i = 0; i < n; ++i) rng::unit_sphere(X.row(i), d, g);
  return X;
}

std::pair<bool, std::string> check_oracles() {
  constexpr std::size_t kPairs = 100, kSamples = 1000000;
  constexpr int d = 5;
  constexpr std::uint64_t kSeed = 11;
  const Mat X = unit_rows(kPairs, d, kSeed, 1);
  const Mat Xp = unit_rows(kPairs, d, kSeed, 2);
  const auto est = mc::kappa_oracle_batch(X, Xp, kSamples, kSeed);

  int se_violations = 0;
  double worst_abs = 0.0, worst_sigma = 0.0;
  for (std::size_t p = 0; p < kPairs; ++p) {
    const double closed[4] = {kernels::kappa1(X.row(p), Xp.row(p), d),
                              kernels::kappa2(X.row(p), Xp.row(p), d),
                              kernels::kappa3(X.row(p), Xp.row(p), d),
                              kernels::kappa4(X.row(p), Xp.row(p), d)};
    for (int k = 0; k < 4; ++k) {
      const double dev = std::fabs(closed[k] - est[p][k].value);
      worst_abs = std::max(worst_abs, dev);
      worst_sigma = std::max(worst_sigma, dev / est[p][k].std_error);
      if (dev > 3.0 * est[p][k].std_error) ++se_violations;
    }
  }
  const bool ok = se_violations == 0 && worst_abs <= 1e-2;
  std::ostringstream d2;
  d2.precision(3);
  d2 << "400 checks, worst " << worst_sigma << " sigma, worst abs " << worst_abs
     << ", 3-sigma violations " << se_violations;
  return {ok, d2.str()};
}

std::pair<bool, std::string> check_converge_init(const std::string& root) {
  experiments::ConvergeInitConfig config;
  config.out_dir = root + "/converge_init";
  const auto res = experiments::run_converge_init(config);
  bool factors_ok = true;
  for (double f : res.reduction_factors) factors_ok = factors_ok && f >= 0.35 && f <= 0.7;
  const bool ok = res.strictly_decreasing && factors_ok && res.all_below_bound;
  std::ostringstream d2;
  d2.precision(4);
  d2 << "mean dev";
  for (double v : res.mean_abs_dev) d2 << " " << v;
  d2 << ", factors";
  for (double f : res.reduction_factors) d2 << " " << f;
  d2 << ", decreasing " << (res.strictly_decreasing ? "yes" : "no") << ", below bound "
     << (res.all_below_bound ? "yes" : "no");
  return {ok, d2.str()};
}

std::pair<bool, std::string> check_stability(const std::string& root) {
  experiments::StabilityConfig config;
  config.out_dir = root + "/stability";
  const auto res = experiments::run_stability(config);
  const bool ok = res.envelope_ok && res.drift_ordered;
  std::ostringstream d2;
  d2.precision(4);
  d2 << "eta0 " << res.eta0 << ", envelope at m=" << config.envelope_width << " "
     << (res.envelope_ok ? "holds" : "violated") << ", drift medians";
  for (double v : res.median_sup_drift) d2 << " " << v;
  d2 << " (" << (res.drift_ordered ? "ordered" : "out of order") << ")";
  return {ok, d2.str()};
}

std::pair<bool, std::string> check_extrapolation(const std::string& root) {
  experiments::ExtrapolationConfig config;
  config.out_dir = root + "/extrapolation";
  const auto res = experiments::run_extrapolation(config);
  const bool mlp_linear =
      res.mlp_best_degree == 1 && res.mlp_second_diff_max <= 1e-3 * res.mlp_scale;
  const bool ok = mlp_linear && res.pnn_degree_r2 >= 0.99;
  std::ostringstream d2;
  d2.precision(6);
  d2 << "mlp degree " << res.mlp_best_degree << ", second diff " << res.mlp_second_diff_max
     << " vs scale " << res.mlp_scale << ", pnn cubic R2 " << res.pnn_degree_r2;
  return {ok, d2.str()};
}

std::pair<bool, std::string> check_exact_extrapolation(const std::string& root) {
  experiments::ExactExtrapolationConfig config;
  config.out_dir = root + "/exact_extrapolation";
  const auto res = experiments::run_exact_extrapolation(config);
  const bool ok = res.median_rel_err <= 0.05 && res.ablation_ratio >= 5.0;
  std::ostringstream d2;
  d2.precision(4);
  d2 << "median rel err " << res.median_rel_err << ", ablation " << res.ablation_median_rel_err
     << " (" << res.ablation_ratio << "x)";
  return {ok, d2.str()};
}

std::pair<bool, std::string> check_gegenbauer() {
  double worst_orth = 0.0, worst_lin = 0.0, most_negative = 0.0;
  for (int D : {3, 4, 6}) {
    const double gamma = (D - 2) / 2.0;
    const spectral::Quadrature rule = spectral::sphere_rule(D, 256);
    const int kmax = 8;
    std::vector<double> vals((kmax + 1));
    Mat overlap(kmax + 1, kmax + 1);
    for (std::size_t i = 0; i < rule.t.size(); ++i) {
      spectral::gegenbauer_all(kmax, gamma, rule.t[i], vals.data());
      for (int p = 0; p <= kmax; ++p)
        for (int q = p; q <= kmax; ++q) overlap(p, q) += rule.w[i] * vals[p] * vals[q];
    }
    for (int p = 0; p <= kmax; ++p)
      for (int q = p + 1; q <= kmax; ++q)
        worst_orth = std::max(
            worst_orth, std::fabs(overlap(p, q)) / std::sqrt(overlap(p, p) * overlap(q, q)));

    for (int p = 0; p <= 6; ++p)
      for (int q = 0; q <= 6; ++q) {
        const std::vector<double> lam = spectral::linearization_coeffs(p, q, gamma);
        for (int ti = 0; ti <= 40; ++ti) {
          const double t = -1.0 + ti * 0.05;
          const double lhs = spectral::gegenbauer_eval(p, gamma, t) *
                             spectral::gegenbauer_eval(q, gamma, t);
          double rhs = 0.0;
          for (std::size_t s = 0; s < lam.size(); ++s)
            rhs += lam[s] * spectral::gegenbauer_eval(p + q - 2 * static_cast<int>(s), gamma, t);
          worst_lin = std::max(worst_lin, std::fabs(lhs - rhs) / (1.0 + std::fabs(lhs)));
        }
      }

    for (int N : {2, 3, 4}) {
      const spectral::GegenbauerSeries series = spectral::kernel_profile_coeffs(
          [N](double t) { return kernels::pnn_profile(N, t); }, D, 30, 240);
      const spectral::SpectralEstimate est = spectral::eigenvalues_from_coeffs(series, D);
      for (int k = 0; k <= 30; ++k) {
        most_negative = std::min(most_negative, series.coeffs[k]);
        most_negative = std::min(most_negative, est.mu[k]);
      }
    }
  }
  const bool ok = worst_orth <= 1e-10 && worst_lin <= 1e-8 && most_negative >= -1e-10;
  std::ostringstream d2;
  d2.precision(3);
  d2 << "orthogonality " << worst_orth << ", linearization " << worst_lin
     << ", most negative coeff " << most_negative;
  return {ok, d2.str()};
}

std::pair<bool, std::string> check_decay_ordering(const std::string& root) {
  experiments::SpectrumConfig config;
  config.out_dir = root + "/spectrum";
  const auto res = experiments::run_spectrum(config);
  const bool ok = res.pnn_above_mlp && res.margin > 0.3;
  std::ostringstream d2;
  d2.precision(4);
  d2 << "slopes pnn";
  for (double s : res.pnn_slopes) d2 << " " << s;
  d2 << ", mlp " << res.mlp_slope << ", margin " << res.margin << " (need > 0.3)"
     << ", order trend " << (res.monotone_trend ? "monotone" : "not monotone");
  return {ok, d2.str()};
}

std::pair<bool, std::string> check_spectral_bias(const std::string& root) {
  experiments::SpectralBiasConfig config;
  config.out_dir = root + "/spectral_bias";
  const auto res = experiments::run_spectral_bias(config);
  const bool ok = res.k8_decreasing_seeds >= 2 && res.k1_fastest_all;
  std::ostringstream d2;
  d2.precision(3);
  d2 << "k8 decreasing in " << res.k8_decreasing_seeds << "/" << res.seed_count
     << " seeds, k1 fastest " << (res.k1_fastest_all ? "everywhere" : "violated");
  d2 << "; per run (order: diag median, dead frac, k8 rate realized/analytic)";
  for (const auto& run : res.runs)
    d2 << " [s" << run.seed << " N" << run.order << ": " << run.kernel_diag_median << ", "
       << run.dead_fraction << ", " << run.realized_rate_k8 << "/" << run.analytic_rate_k8 << "]";
  return {ok, d2.str()};
}

// collects name -> bytes for every csv under dir
std::map<std::string, std::string> csv_bytes(const std::string& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".csv")
      out[entry.path().filename().string()] = io::read_text(entry.path().string());
  return out;
}

std::pair<bool, std::string> check_determinism(const std::string& root) {
  const std::string base = root + "/rerun";
  int files = 0, drivers = 0;
  std::vector<std::string> mismatched;

  const auto rerun = [&](const std::string& name, auto&& fn) {
    const std::string a = base + "/" + name + "_a", b = base + "/" + name + "_b";
    fn(a);
    fn(b);
    const auto ba = csv_bytes(a), bb = csv_bytes(b);
    ++drivers;
    if (ba.size() != bb.size() || ba.empty()) {
      mismatched.push_back(name + " (file count)");
      return;
    }
    for (const auto& [file, bytes] : ba) {
      ++files;
      const auto it = bb.find(file);
      if (it == bb.end() || it->second != bytes) mismatched.push_back(name + "/" + file);
    }
  };

  rerun("extrapolate", [](const std::string& dir) {
    experiments::ExtrapolationConfig c;
    c.out_dir = dir;
    experiments::run_extrapolation(c);
  });
  rerun("exact", [](const std::string& dir) {
    experiments::ExactExtrapolationConfig c;
    c.out_dir = dir;
    experiments::run_exact_extrapolation(c);
  });
  rerun("converge", [](const std::string& dir) {
    experiments::ConvergeInitConfig c;
    c.widths = {64, 256};
    c.seeds = 3;
    c.out_dir = dir;
    experiments::run_converge_init(c);
  });
  rerun("stability", [](const std::string& dir) {
    experiments::StabilityConfig c;
    c.widths = {64, 128};
    c.envelope_width = 128;
    c.seeds = 2;
    c.steps = 60;
    c.out_dir = dir;
    experiments::run_stability(c);
  });
  rerun("spectrum", [](const std::string& dir) {
    experiments::SpectrumConfig c;
    c.kmax = 24;
    c.fit_lo = 2;
    c.fit_hi = 24;
    c.out_dir = dir;
    experiments::run_spectrum(c);
  });
  rerun("bias", [](const std::string& dir) {
    experiments::SpectralBiasConfig c;
    c.orders = {2, 3};
    c.width = 128;
    c.n_samples = 120;
    c.steps = 60;
    c.batch = 30;
    c.seeds = {1};
    c.out_dir = dir;
    experiments::run_spectral_bias(c);
  });

  std::ostringstream d2;
  d2 << drivers << " drivers rerun, " << files << " csv files compared";
  if (!mismatched.empty()) {
    d2 << ", mismatches:";
    for (const auto& m : mismatched) d2 << " " << m;
  }
  return {mismatched.empty() && files > 0, d2.str()};
}

} // namespace

int main(int argc, char** argv) {
  const std::string root = argc > 1 ? argv[1] : "acceptance_out";
  fs::create_directories(root);
  std::cout << "simd backend: " << simd::isa_name(simd::active()) << "\n";

  criterion(1, 30, [] { return check_oracles(); });
  criterion(2, 120, [&] { return check_converge_init(root); });
  criterion(3, 300, [&] { return check_stability(root); });
  criterion(4, 30, [&] { return check_extrapolation(root); });
  criterion(5, 30, [&] { return check_exact_extrapolation(root); });
  criterion(6, 10, [] { return check_gegenbauer(); });
  criterion(7, 30, [&] { return check_decay_ordering(root); });
  criterion(8, 900, [&] { return check_spectral_bias(root); });
  criterion(9, 600, [&] { return check_determinism(root); });

  if (g_failures == 0) {
    std::cout << "all criteria passed\n";
    return 0;
  }
  std::cout << g_failures << " criteria failed\n";
  return 1;
}
