#include "hpntk/experiments.h"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <stdexcept>

#include "hpntk/gd.h"
#include "hpntk/io.h"
#include "hpntk/kernels.h"
#include "hpntk/nets.h"
#include "hpntk/regress.h"
#include "hpntk/rng.h"
#include "hpntk/simd.h"
#include "hpntk/spectral.h"

#ifndef HPNTK_VERSION
#define HPNTK_VERSION "unknown"
#endif

namespace hpntk::experiments {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using kernels::Family;
using kernels::KernelModel;

// substream keys for experiment inputs; net layers live below 0x1000
constexpr std::uint64_t kKeyData = 0x1000;
constexpr std::uint64_t kKeyLabels = 0x1001;
constexpr std::uint64_t kKeyAnchors = 0x1002;
constexpr std::uint64_t kKeyPairs = 0x1003;
constexpr std::uint64_t kKeyNetSeed = 0x1004;

struct Stopwatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

std::string out_path(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  return (fs::path(dir) / name).string();
}

void write_sidecar(const std::string& dir, const std::string& name, const json& config_echo,
                   const json& results, const Stopwatch& watch) {
  json j;
  j["config"] = config_echo;
  j["results"] = results;
  j["version"] = HPNTK_VERSION;
  j["duration_seconds"] = watch.seconds();
  io::write_json(out_path(dir, name), j);
}

void require_out_dir(const std::string& dir) {
  if (dir.empty()) throw std::invalid_argument("output directory is required");
}

int check_threads(int threads) {
  if (threads < 1) throw std::invalid_argument("thread count must be >= 1");
  return threads;
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Mat unit_rows(std::size_t n, std::size_t d, std::uint64_t seed, std::uint64_t key) {
  Mat X(n, d);
  rng::Gaussian g(rng::substream(seed, key));
  for (std::size_t i = 0; i < n; ++i) rng::unit_sphere(X.row(i), d, g);
  return X;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return rng::substream(seed, kKeyNetSeed + a, b).next();
}

// ----- ray extrapolation ------------------------------------------------

struct Target {
  int d;
  double (*eval)(const double*);
};

Target target_of(const std::string& name) {
  if (name == "poly3")
    return {1, [](const double* x) { return x[0] * x[0] * x[0] + x[0] * x[0] - 10.0 * x[0] + 5.0; }};
  if (name == "cos2x") return {1, [](const double* x) { return std::cos(2.0 * x[0]); }};
  if (name == "quad2d") return {2, [](const double* x) { return x[0] * x[0] + x[1] * x[1]; }};
  throw std::invalid_argument("unknown target: " + name);
}

Eigen::VectorXd polyfit(const std::vector<double>& h, const std::vector<double>& f, int degree) {
  const int n = static_cast<int>(h.size());
  Eigen::MatrixXd V(n, degree + 1);
  for (int i = 0; i < n; ++i) {
    double p = 1.0;
    for (int j = 0; j <= degree; ++j) {
      V(i, j) = p;
      p *= h[i];
    }
  }
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(f.data(), n);
  return V.colPivHouseholderQr().solve(y);
}

double fit_residual_norm(const std::vector<double>& h, const std::vector<double>& f,
                         const Eigen::VectorXd& coef) {
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    double p = 0.0;
    for (int j = static_cast<int>(coef.size()) - 1; j >= 0; --j) p = p * h[i] + coef(j);
    const double r = f[i] - p;
    s += r * r;
  }
  return std::sqrt(s);
}

} // namespace

DegreeFit ray_poly_degree_fit(const std::vector<double>& h, const std::vector<double>& f,
                              int max_degree) {
  if (h.size() != f.size() || h.empty()) throw std::invalid_argument("ray sample mismatch");
  if (max_degree < 0 || max_degree + 1 > static_cast<int>(h.size()))
    throw std::invalid_argument("max_degree must fit the sample count");
  double fnorm = 0.0;
  for (double v : f) fnorm += v * v;
  fnorm = std::sqrt(fnorm);
  DegreeFit fit;
  for (int deg = 0; deg <= max_degree; ++deg) {
    const double resid = fit_residual_norm(h, f, polyfit(h, f, deg));
    fit.rel_residual.push_back(fnorm > 0.0 ? resid / fnorm : 0.0);
    if (fit.best_degree < 0 && fit.rel_residual.back() <= 1e-3) fit.best_degree = deg;
  }
  return fit;
}

double poly_fit_r2(const std::vector<double>& h, const std::vector<double>& f, int degree) {
  const double resid = fit_residual_norm(h, f, polyfit(h, f, degree));
  double mean = 0.0;
  for (double v : f) mean += v;
  mean /= static_cast<double>(f.size());
  double sst = 0.0;
  for (double v : f) sst += (v - mean) * (v - mean);
  if (sst == 0.0) return 1.0;
  return 1.0 - resid * resid / sst;
}

ExtrapolationResult run_extrapolation(const ExtrapolationConfig& config) {
  require_out_dir(config.out_dir);
  check_threads(config.threads);
  if (config.order < 2) throw std::invalid_argument("order must be >= 2");
  if (config.base_t <= 1.0) throw std::invalid_argument("ray base must exceed the training radius");
  if (config.h_steps < 2 || config.h_max <= 0.0) throw std::invalid_argument("bad ray grid");
  Stopwatch watch;
  const Target target = target_of(config.target);
  const int d = target.d;

  // training inputs uniform in [-1,1]^d, kept away from the origin
  regress::Dataset data;
  data.X = Mat(config.n_train, d);
  rng::Xoshiro256pp gen = rng::substream(config.seed, kKeyData);
  for (int i = 0; i < config.n_train; ++i) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (int j = 0; j < d; ++j) {
        data.X(i, j) = 2.0 * gen.uniform01() - 1.0;
        norm += data.X(i, j) * data.X(i, j);
      }
    } while (norm < 1e-12);
  }
  data.y.resize(config.n_train);
  double max_norm = 0.0;
  for (int i = 0; i < config.n_train; ++i) {
    data.y[i] = target.eval(data.X.row(i));
    max_norm = std::max(max_norm, std::sqrt(simd::dot(data.X.row(i), data.X.row(i), d)));
  }

  const KernelModel pnn{Family::pnn, config.order, d};
  const KernelModel mlp{Family::mlp, config.order + 1, d};
  const regress::RegressionModel fit_pnn = regress::fit(pnn, data);
  const regress::RegressionModel fit_mlp = regress::fit(mlp, data);

  // ray x0 + h v with x0 = t v; v points along (1,..,1)/sqrt(d), scaled to the
  // max training norm
  std::vector<double> v(d, max_norm / std::sqrt(static_cast<double>(d)));
  ExtrapolationResult res;
  std::vector<double> x(d);
  for (int i = 0; i < config.h_steps; ++i) {
    const double h = config.h_max * i / (config.h_steps - 1);
    for (int j = 0; j < d; ++j) x[j] = (config.base_t + h) * v[j];
    res.h.push_back(h);
    res.f_pnn.push_back(regress::predict(fit_pnn, x.data()));
    res.f_mlp.push_back(regress::predict(fit_mlp, x.data()));
    res.target.push_back(target.eval(x.data()));
  }

  const int max_deg = std::min(config.order + 2, config.h_steps - 1);
  const DegreeFit pnn_fit = ray_poly_degree_fit(res.h, res.f_pnn, max_deg);
  const DegreeFit mlp_fit = ray_poly_degree_fit(res.h, res.f_mlp, max_deg);
  res.pnn_best_degree = pnn_fit.best_degree;
  res.mlp_best_degree = mlp_fit.best_degree;
  res.pnn_degree_r2 = poly_fit_r2(res.h, res.f_pnn, config.order);
  for (double f : res.f_mlp) res.mlp_scale = std::max(res.mlp_scale, std::fabs(f));
  for (std::size_t i = 1; i + 1 < res.f_mlp.size(); ++i)
    res.mlp_second_diff_max = std::max(
        res.mlp_second_diff_max,
        std::fabs(res.f_mlp[i - 1] - 2.0 * res.f_mlp[i] + res.f_mlp[i + 1]));

  io::CsvWriter csv(out_path(config.out_dir, "extrapolation.csv"));
  csv.header({"h", "f_pnn", "f_mlp", "target"});
  for (std::size_t i = 0; i < res.h.size(); ++i)
    csv.row({io::fmt(res.h[i]), io::fmt(res.f_pnn[i]), io::fmt(res.f_mlp[i]),
             io::fmt(res.target[i])});
  csv.close();

  const json echo = {{"target", config.target},      {"order", config.order},
                     {"n_train", config.n_train},    {"base_t", config.base_t},
                     {"h_max", config.h_max},        {"h_steps", config.h_steps},
                     {"seed", config.seed},          {"threads", config.threads},
                     {"out_dir", config.out_dir}};
  const json results = {{"pnn_best_degree", res.pnn_best_degree},
                        {"mlp_best_degree", res.mlp_best_degree},
                        {"pnn_degree_r2", res.pnn_degree_r2},
                        {"mlp_second_diff_max", res.mlp_second_diff_max},
                        {"mlp_scale", res.mlp_scale},
                        {"pnn_jitter", fit_pnn.jitter},
                        {"mlp_jitter", fit_mlp.jitter}};
  write_sidecar(config.out_dir, "extrapolation.json", echo, results, watch);
  return res;
}

ExactExtrapolationResult run_exact_extrapolation(const ExactExtrapolationConfig& config) {
  require_out_dir(config.out_dir);
  check_threads(config.threads);
  Stopwatch watch;
  const int d = 2;
  std::vector<double> beta = config.beta;
  if (beta.empty()) beta = {1.0, 0.0, 0.0, 1.0};
  if (beta.size() != d * d) throw std::invalid_argument("beta must be 2x2 row-major");
  const auto quad = [&](const double* x) {
    double s = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) s += x[i] * beta[i * d + j] * x[j];
    return s;
  };

  const KernelModel model{Family::pnn, 2, d};
  const auto build = [&](bool positive_only) {
    regress::Dataset data;
    const int n_axis = positive_only ? d : 2 * d;
    data.X = Mat(n_axis + config.n_random, d);
    std::size_t r = 0;
    for (int i = 0; i < d; ++i) {
      data.X(r, i) = 1.0;
      ++r;
      if (!positive_only) {
        data.X(r, i) = -1.0;
        ++r;
      }
    }
    rng::Gaussian g(rng::substream(config.seed, positive_only ? kKeyAnchors : kKeyData));
    for (int i = 0; i < config.n_random; ++i, ++r) {
      rng::unit_sphere(data.X.row(r), d, g);
      if (positive_only)
        for (int j = 0; j < d; ++j) data.X(r, j) = std::fabs(data.X(r, j));
    }
    data.y.resize(data.X.rows);
    for (std::size_t i = 0; i < data.X.rows; ++i) data.y[i] = quad(data.X.row(i));
    return regress::fit(model, data);
  };

  const auto evaluate = [&](const regress::RegressionModel& fit, const std::string& name) {
    io::CsvWriter csv(out_path(config.out_dir, name));
    csv.header({"x1", "x2", "f_pred", "f_true", "rel_err"});
    std::vector<double> errs;
    for (double radius : config.radii)
      for (int a = 0; a < config.n_angles; ++a) {
        const double ang = 2.0 * std::numbers::pi * a / config.n_angles;
        const double x[2] = {radius * std::cos(ang), radius * std::sin(ang)};
        const double pred = regress::predict(fit, x);
        const double truth = quad(x);
        const double rel = std::fabs(pred - truth) / std::max(std::fabs(truth), 1e-12);
        errs.push_back(rel);
        csv.row({io::fmt(x[0]), io::fmt(x[1]), io::fmt(pred), io::fmt(truth), io::fmt(rel)});
      }
    csv.close();
    return median(errs);
  };

  ExactExtrapolationResult res;
  res.median_rel_err = evaluate(build(false), "exact_extrapolation.csv");
  res.ablation_median_rel_err = evaluate(build(true), "exact_extrapolation_ablation.csv");
  res.ablation_ratio = res.ablation_median_rel_err / std::max(res.median_rel_err, 1e-300);

  const json echo = {{"beta", beta},
                     {"n_random", config.n_random},
                     {"radii", config.radii},
                     {"n_angles", config.n_angles},
                     {"seed", config.seed},
                     {"threads", config.threads},
                     {"out_dir", config.out_dir}};
  const json results = {{"median_rel_err", res.median_rel_err},
                        {"ablation_median_rel_err", res.ablation_median_rel_err},
                        {"ablation_ratio", res.ablation_ratio}};
  write_sidecar(config.out_dir, "exact_extrapolation.json", echo, results, watch);
  return res;
}

ConvergeInitResult run_converge_init(const ConvergeInitConfig& config) {
  require_out_dir(config.out_dir);
  check_threads(config.threads);
  if (config.widths.empty() || config.seeds < 1 || config.n_pairs < 1)
    throw std::invalid_argument("need widths, seeds and pairs");
  Stopwatch watch;
  const int d = config.input_dim, N = config.order;

  Mat A = unit_rows(config.n_pairs, d, config.seed, kKeyPairs);
  Mat B = unit_rows(config.n_pairs, d, config.seed, kKeyPairs + 1);
  std::vector<double> analytic(config.n_pairs);
  for (int p = 0; p < config.n_pairs; ++p)
    analytic[p] = kernels::pnn_ntk(N, A.row(p), B.row(p), d);

  ConvergeInitResult res;
  res.widths = config.widths;
  res.all_below_bound = true;
  std::vector<double> jac_a, jac_b;
  for (std::size_t wi = 0; wi < config.widths.size(); ++wi) {
    const int m = config.widths[wi];
    const double bound = kernels::theory_init_bound(N, m, config.delta).second;
    double sum = 0.0, worst = 0.0;
    bool below = true;
    for (int s = 0; s < config.seeds; ++s) {
      nets::ArchSpec spec{Family::pnn, N, m, d, derive_seed(config.seed, wi, s)};
      const nets::NetParams params = nets::init_params(spec);
      jac_a.resize(params.theta_size());
      jac_b.resize(params.theta_size());
      for (int p = 0; p < config.n_pairs; ++p) {
        nets::jacobian(params, A.row(p), jac_a.data());
        nets::jacobian(params, B.row(p), jac_b.data());
        const double khat = simd::dot(jac_a.data(), jac_b.data(), params.theta_size());
        const double dev = std::fabs(khat - analytic[p]);
        sum += dev;
        worst = std::max(worst, dev);
        below = below && dev <= bound;
      }
    }
    res.mean_abs_dev.push_back(sum / (config.seeds * config.n_pairs));
    res.max_abs_dev.push_back(worst);
    res.theory_bound.push_back(bound);
    res.all_below_bound = res.all_below_bound && below;
  }
  res.strictly_decreasing = true;
  for (std::size_t i = 1; i < res.mean_abs_dev.size(); ++i) {
    res.strictly_decreasing = res.strictly_decreasing &&
                              res.mean_abs_dev[i] < res.mean_abs_dev[i - 1];
    res.reduction_factors.push_back(res.mean_abs_dev[i] / res.mean_abs_dev[i - 1]);
  }

  io::CsvWriter csv(out_path(config.out_dir, "converge_init.csv"));
  csv.header({"width", "mean_abs_dev", "max_abs_dev", "theory_bound"});
  for (std::size_t i = 0; i < res.widths.size(); ++i)
    csv.row({io::fmt(static_cast<std::int64_t>(res.widths[i])), io::fmt(res.mean_abs_dev[i]),
             io::fmt(res.max_abs_dev[i]), io::fmt(res.theory_bound[i])});
  csv.close();

  const json echo = {{"order", config.order},   {"input_dim", config.input_dim},
                     {"widths", config.widths}, {"seeds", config.seeds},
                     {"n_pairs", config.n_pairs}, {"delta", config.delta},
                     {"seed", config.seed},     {"threads", config.threads},
                     {"out_dir", config.out_dir}};
  const json results = {{"mean_abs_dev", res.mean_abs_dev},
                        {"max_abs_dev", res.max_abs_dev},
                        {"theory_bound", res.theory_bound},
                        {"reduction_factors", res.reduction_factors},
                        {"strictly_decreasing", res.strictly_decreasing},
                        {"all_below_bound", res.all_below_bound}};
  write_sidecar(config.out_dir, "converge_init.json", echo, results, watch);
  return res;
}

StabilityResult run_stability(const StabilityConfig& config) {
  require_out_dir(config.out_dir);
  check_threads(config.threads);
  if (config.widths.empty() || config.seeds < 1) throw std::invalid_argument("need widths and seeds");
  Stopwatch watch;
  const int d = config.input_dim, N = config.order;

  regress::Dataset data;
  data.X = unit_rows(config.n_train, d, config.seed, kKeyData);
  data.y.resize(config.n_train);
  rng::fill_gaussian(data.y.data(), data.y.size(), config.seed, kKeyLabels);

  const KernelModel model{Family::pnn, N, d};
  const regress::GramMatrix gram = regress::assemble_gram(model, data.X);
  const auto [lmin, lmax] = regress::spectrum_bounds(gram.entries);
  const double eta0 = config.lr_fraction * 2.0 / (lmin + lmax);

  StabilityResult res;
  res.lambda_min = lmin;
  res.lambda_max = lmax;
  res.eta0 = eta0;
  res.widths = config.widths;
  res.envelope_ok = true;
  gd::TrainConfig tc{eta0, config.steps, config.record_ntk_every};
  json seed_reports = json::array();
  for (std::size_t wi = 0; wi < config.widths.size(); ++wi) {
    const int m = config.widths[wi];
    std::vector<double> drifts;
    for (int s = 0; s < config.seeds; ++s) {
      nets::ArchSpec spec{Family::pnn, N, m, d, derive_seed(config.seed, wi, s)};
      const gd::TrainTrace trace = gd::gd_train(nets::init_params(spec), data, tc);
      const gd::StabilityReport rep = gd::stability_report(trace, gram.entries, eta0);
      drifts.push_back(rep.sup_drift);
      if (m == config.envelope_width && !rep.envelope_ok) res.envelope_ok = false;

      io::CsvWriter csv(out_path(config.out_dir, "stability_m" + std::to_string(m) + "_s" +
                                                     std::to_string(s) + ".csv"));
      csv.header({"step", "loss", "step_norm", "cum_step_norm", "ntk_drift_fro"});
      for (std::size_t i = 0; i < trace.step.size(); ++i)
        csv.row({io::fmt(static_cast<std::int64_t>(trace.step[i])), io::fmt(trace.loss[i]),
                 io::fmt(trace.step_norm[i]), io::fmt(trace.cum_step_norm[i]),
                 io::fmt(trace.ntk_drift[i])});
      csv.close();
      seed_reports.push_back({{"width", m},
                              {"seed", s},
                              {"r0", rep.r0},
                              {"sup_drift", rep.sup_drift},
                              {"cum_step_norm", rep.final_cum_step_norm},
                              {"envelope_ok", rep.envelope_ok},
                              {"first_violation_step", rep.first_violation_step}});
    }
    res.median_sup_drift.push_back(median(drifts));
  }
  res.drift_ordered = res.median_sup_drift.back() < res.median_sup_drift.front();

  const json echo = {{"order", config.order},
                     {"n_train", config.n_train},
                     {"input_dim", config.input_dim},
                     {"widths", config.widths},
                     {"envelope_width", config.envelope_width},
                     {"seeds", config.seeds},
                     {"steps", config.steps},
                     {"record_ntk_every", config.record_ntk_every},
                     {"lr_fraction", config.lr_fraction},
                     {"seed", config.seed},
                     {"threads", config.threads},
                     {"out_dir", config.out_dir}};
  const json results = {{"lambda_min", res.lambda_min},
                        {"lambda_max", res.lambda_max},
                        {"eta0", res.eta0},
                        {"median_sup_drift", res.median_sup_drift},
                        {"envelope_ok", res.envelope_ok},
                        {"drift_ordered", res.drift_ordered},
                        {"runs", seed_reports}};
  write_sidecar(config.out_dir, "stability_report.json", echo, results, watch);
  return res;
}

SpectrumResult run_spectrum(const SpectrumConfig& config) {
  require_out_dir(config.out_dir);
  check_threads(config.threads);
  if (config.pnn_orders.empty()) throw std::invalid_argument("need at least one order");
  Stopwatch watch;
  const int D = config.ambient_dim, kmax = config.kmax;
  const int nodes = config.nodes > 0 ? config.nodes : 8 * kmax;

  const auto slope_of = [&](const spectral::Profile& prof, const std::string& name) {
    const spectral::GegenbauerSeries series = spectral::kernel_profile_coeffs(prof, D, kmax, nodes);
    spectral::SpectralEstimate est = spectral::eigenvalues_from_coeffs(series, D);
    const double slope = spectral::decay_slope(est, config.fit_lo, config.fit_hi, config.even_only);
    io::CsvWriter csv(out_path(config.out_dir, "spectrum_" + name + ".csv"));
    csv.header({"k", "c_k", "mu_k"});
    for (int k = 0; k <= kmax; ++k)
      csv.row({io::fmt(static_cast<std::int64_t>(k)), io::fmt(series.coeffs[k]),
               io::fmt(est.mu[k])});
    csv.close();
    return slope;
  };

  SpectrumResult res;
  for (int N : config.pnn_orders)
    res.pnn_slopes.push_back(slope_of([N](double t) { return kernels::pnn_profile(N, t); },
                                      "pnn" + std::to_string(N)));
  res.mlp_slope = slope_of(
      [depth = config.mlp_depth](double t) { return kernels::mlp_profile(depth, t); },
      "mlp" + std::to_string(config.mlp_depth));
  res.margin = res.pnn_slopes.front() - res.mlp_slope;
  res.pnn_above_mlp = res.margin > 0.0;
  res.monotone_trend = true;
  for (std::size_t i = 1; i < res.pnn_slopes.size(); ++i)
    res.monotone_trend = res.monotone_trend && res.pnn_slopes[i] >= res.pnn_slopes[i - 1];

  const json echo = {{"ambient_dim", config.ambient_dim},
                     {"pnn_orders", config.pnn_orders},
                     {"mlp_depth", config.mlp_depth},
                     {"kmax", config.kmax},
                     {"nodes", nodes},
                     {"fit_lo", config.fit_lo},
                     {"fit_hi", config.fit_hi},
                     {"even_only", config.even_only},
                     {"threads", config.threads},
                     {"out_dir", config.out_dir}};
  const json results = {{"pnn_slopes", res.pnn_slopes},
                        {"mlp_slope", res.mlp_slope},
                        {"margin", res.margin},
                        {"pnn_above_mlp", res.pnn_above_mlp},
                        {"monotone_trend", res.monotone_trend}};
  write_sidecar(config.out_dir, "spectrum.json", echo, results, watch);
  return res;
}

namespace {

// one spectral-bias training run at a fixed (seed, order)
SpectralBiasRun bias_run(const SpectralBiasConfig& config, std::uint64_t seed, int order,
                         io::CsvWriter& csv, const Mat& X, const Mat& comp,
                         const std::vector<double>& fstar, double mu8) {
  const int n = config.n_samples, d = config.input_dim, m = config.width, B = config.batch;
  const std::size_t kc = config.degrees.size();
  nets::ArchSpec spec{Family::pnn, order, m, d, seed};
  nets::NetParams p = nets::init_params(spec);

  SpectralBiasRun run;
  run.seed = seed;
  run.order = order;
  run.analytic_rate_k8 = static_cast<double>(n) * mu8;

  // tangent Gram diagnostics at init: diag_i = sum_n ||U_n||^2 ||x_i||^2 + ||V||^2
  {
    Mat U;
    std::vector<double> v, diag(n);
    for (int i = 0; i < n; ++i) {
      nets::gradient_factors(p, X.row(i), U, v);
      double s = simd::dot(v.data(), v.data(), v.size());
      const double xx = simd::dot(X.row(i), X.row(i), d);
      for (int l = 0; l < order; ++l) s += simd::dot(U.row(l), U.row(l), m) * xx;
      diag[i] = s;
    }
    run.kernel_diag_median = median(diag);
    const double analytic_diag = 2.0 * order + 2.0;
    int dead = 0;
    for (double v2 : diag)
      if (v2 < 0.01 * analytic_diag) ++dead;
    run.dead_fraction = static_cast<double>(dead) / n;
  }

  std::vector<double> f0(n, 0.0);
  if (config.center_init)
    for (int i = 0; i < n; ++i) f0[i] = nets::forward(p, X.row(i));

  std::vector<double> r(n);
  double r0_norm = 0.0;
  const auto record = [&](int t) {
    double nrm = 0.0;
    for (int i = 0; i < n; ++i) {
      r[i] = nets::forward(p, X.row(i)) - f0[i] - fstar[i];
      nrm += r[i] * r[i];
    }
    nrm = std::sqrt(nrm);
    if (t == 0) r0_norm = nrm;
    if (!std::isfinite(nrm) || nrm > config.divergence_factor * r0_norm)
      throw std::runtime_error("training diverged at iteration " + std::to_string(t) +
                               " (order " + std::to_string(order) + ")");
    const std::vector<double> proj = spectral::residual_projections(r, comp);
    for (std::size_t j = 0; j < kc; ++j)
      csv.row({io::fmt(static_cast<std::int64_t>(t)),
               io::fmt(static_cast<std::int64_t>(order)),
               io::fmt(static_cast<std::int64_t>(config.degrees[j])), io::fmt(proj[j])});
    return proj;
  };

  std::vector<std::pair<int, std::vector<double>>> traj;
  traj.emplace_back(0, record(0));
  Mat U;
  std::vector<double> v;
  for (int t = 0; t < config.steps; ++t) {
    const int lo = (t * B) % n;
    for (int b = 0; b < B; ++b) {
      const int i = (lo + b) % n;
      const double* x = X.row(i);
      const double err = nets::forward(p, x) - f0[i] - fstar[i];
      nets::gradient_factors(p, x, U, v);
      const double step = -config.learning_rate * err;
      for (int l = 0; l < order; ++l)
        for (int j = 0; j < d; ++j) simd::axpy(step * x[j], U.row(l), p.W[l].row(j), m);
    }
    const int tnext = t + 1;
    if (tnext % config.record_every == 0 || tnext == config.steps)
      traj.emplace_back(tnext, record(tnext));
  }

  run.proj_initial = traj.front().second;
  run.proj_final = traj.back().second;
  run.first_passage.assign(kc, -1);
  for (std::size_t j = 0; j < kc; ++j) {
    const double thr = 0.75 * run.proj_initial[j];
    for (const auto& [t, proj] : traj)
      if (proj[j] <= thr) {
        run.first_passage[j] = t;
        break;
      }
  }
  const auto k8 = std::find(config.degrees.begin(), config.degrees.end(), 8);
  if (k8 != config.degrees.end()) {
    const std::size_t j = k8 - config.degrees.begin();
    const double ratio = run.proj_final[j] / std::max(run.proj_initial[j], 1e-300);
    const double horizon = config.learning_rate * (static_cast<double>(B) / n) * config.steps;
    run.realized_rate_k8 = ratio > 0.0 ? -std::log(ratio) / horizon : 0.0;
  }
  return run;
}

} // namespace

SpectralBiasResult run_spectral_bias(const SpectralBiasConfig& config) {
  require_out_dir(config.out_dir);
  check_threads(config.threads);
  if (config.orders.empty() || config.seeds.empty() || config.degrees.empty())
    throw std::invalid_argument("need orders, seeds and degrees");
  if (config.batch < 1 || config.batch > config.n_samples)
    throw std::invalid_argument("batch must be in [1, n_samples]");
  Stopwatch watch;
  const int n = config.n_samples, d = config.input_dim;
  const std::size_t kc = config.degrees.size();
  const double gamma = (d - 2) / 2.0;

  // analytic mu_8 per order for the rate diagnostics
  const int kmax = *std::max_element(config.degrees.begin(), config.degrees.end());
  std::vector<double> mu8(config.orders.size(), 0.0);
  for (std::size_t oi = 0; oi < config.orders.size(); ++oi) {
    const int N = config.orders[oi];
    const spectral::GegenbauerSeries series = spectral::kernel_profile_coeffs(
        [N](double t) { return kernels::pnn_profile(N, t); }, d, kmax, 8 * kmax);
    const spectral::SpectralEstimate est = spectral::eigenvalues_from_coeffs(series, d);
    if (kmax >= 8) mu8[oi] = est.mu[8];
  }

  SpectralBiasResult res;
  res.seed_count = static_cast<int>(config.seeds.size());
  json run_reports = json::array();
  for (std::uint64_t seed : config.seeds) {
    const Mat X = unit_rows(n, d, seed, kKeyData);
    const Mat anchors = unit_rows(kc, d, seed, kKeyAnchors);
    Mat comp(n, kc);
    for (int i = 0; i < n; ++i)
      for (std::size_t j = 0; j < kc; ++j) {
        const double t = std::clamp(simd::dot(X.row(i), anchors.row(j), d), -1.0, 1.0);
        comp(i, j) = spectral::gegenbauer_eval(config.degrees[j], gamma, t, true);
      }
    std::vector<double> fstar(n, 0.0);
    for (int i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < kc; ++j) fstar[i] += comp(i, j);
      fstar[i] /= static_cast<double>(kc);
    }

    io::CsvWriter csv(out_path(config.out_dir, "spectral_bias_s" + std::to_string(seed) + ".csv"));
    csv.header({"iteration", "order_n", "harmonic_k", "projection_length"});
    std::vector<double> k8_finals;
    for (std::size_t oi = 0; oi < config.orders.size(); ++oi) {
      SpectralBiasRun run =
          bias_run(config, seed, config.orders[oi], csv, X, comp, fstar, mu8[oi]);
      run_reports.push_back({{"seed", run.seed},
                             {"order", run.order},
                             {"initial", run.proj_initial},
                             {"final", run.proj_final},
                             {"first_passage", run.first_passage},
                             {"kernel_diag_median", run.kernel_diag_median},
                             {"dead_fraction", run.dead_fraction},
                             {"realized_rate_k8", run.realized_rate_k8},
                             {"analytic_rate_k8", run.analytic_rate_k8}});
      const auto k8 = std::find(config.degrees.begin(), config.degrees.end(), 8);
      if (k8 != config.degrees.end())
        k8_finals.push_back(run.proj_final[k8 - config.degrees.begin()]);
      res.runs.push_back(std::move(run));
    }
    csv.close();
    bool decreasing = k8_finals.size() == config.orders.size() && k8_finals.size() > 1;
    for (std::size_t i = 1; i < k8_finals.size(); ++i)
      decreasing = decreasing && k8_finals[i] < k8_finals[i - 1];
    if (decreasing) ++res.k8_decreasing_seeds;
  }

  res.k1_fastest_all = true;
  for (const SpectralBiasRun& run : res.runs) {
    const auto k1 = std::find(config.degrees.begin(), config.degrees.end(), 1);
    if (k1 == config.degrees.end()) {
      res.k1_fastest_all = false;
      break;
    }
    const std::size_t j1 = k1 - config.degrees.begin();
    const int fp1 = run.first_passage[j1];
    if (fp1 < 0) {
      res.k1_fastest_all = false;
      continue;
    }
    for (std::size_t j = 0; j < kc; ++j) {
      if (j == j1) continue;
      const int fpj = run.first_passage[j];
      if (fpj >= 0 && fpj < fp1) res.k1_fastest_all = false;
    }
  }

  const json echo = {{"orders", config.orders},
                     {"width", config.width},
                     {"n_samples", config.n_samples},
                     {"input_dim", config.input_dim},
                     {"degrees", config.degrees},
                     {"steps", config.steps},
                     {"learning_rate", config.learning_rate},
                     {"batch", config.batch},
                     {"record_every", config.record_every},
                     {"center_init", config.center_init},
                     {"divergence_factor", config.divergence_factor},
                     {"seeds", config.seeds},
                     {"threads", config.threads},
                     {"out_dir", config.out_dir}};
  const json results = {{"k8_decreasing_seeds", res.k8_decreasing_seeds},
                        {"seed_count", res.seed_count},
                        {"k1_fastest_all", res.k1_fastest_all},
                        {"runs", run_reports}};
  write_sidecar(config.out_dir, "spectral_bias.json", echo, results, watch);
  return res;
}

} // namespace hpntk::experiments
