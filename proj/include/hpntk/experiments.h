#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "hpntk/mat.h"

// Experiment drivers behind the CLI. Every run is a pure function of its
// config: inputs come from keyed substreams of the config seed, CSV floats go
// through shortest round-trip formatting, and reruns are byte-identical. Each
// driver writes its CSVs plus a JSON sidecar (config echo, version, wall-clock
// duration) into out_dir and returns the numbers the checks care about.
namespace hpntk::experiments {

// polynomial least squares along a ray; best_degree = smallest degree with
// relative residual <= 1e-3, or -1 if none qualifies
struct DegreeFit {
  int best_degree = -1;
  std::vector<double> rel_residual;  // index = degree
};
DegreeFit ray_poly_degree_fit(const std::vector<double>& h, const std::vector<double>& f,
                              int max_degree);
// coefficient of determination of a single degree-`degree` fit
double poly_fit_r2(const std::vector<double>& h, const std::vector<double>& f, int degree);

struct ExtrapolationConfig {
  std::string target = "poly3";  // poly3 | cos2x | quad2d
  int order = 3;                 // PNN degree N; the MLP column uses depth N+1
  int n_train = 24;
  double base_t = 1.1;           // ray base x0 = t*v, ||v|| = max training norm
  double h_max = 2.0;
  int h_steps = 21;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir;
};

struct ExtrapolationResult {
  std::vector<double> h, f_pnn, f_mlp, target;
  int pnn_best_degree = -1, mlp_best_degree = -1;
  double pnn_degree_r2 = 0.0;       // R^2 of the degree-N fit on the PNN column
  double mlp_second_diff_max = 0.0; // max |f[i-1] - 2f[i] + f[i+1]| on the MLP column
  double mlp_scale = 0.0;           // max |f_mlp| over the grid
};
ExtrapolationResult run_extrapolation(const ExtrapolationConfig& config);

struct ExactExtrapolationConfig {
  std::vector<double> beta;  // row-major d x d; empty = identity
  int n_random = 16;
  std::vector<double> radii = {1.5, 2.0, 2.5, 3.0};
  int n_angles = 16;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir;
};

struct ExactExtrapolationResult {
  double median_rel_err = 0.0;
  double ablation_median_rel_err = 0.0;
  double ablation_ratio = 0.0;
};
ExactExtrapolationResult run_exact_extrapolation(const ExactExtrapolationConfig& config);

struct ConvergeInitConfig {
  int order = 2;
  int input_dim = 5;
  std::vector<int> widths = {256, 1024, 4096};
  int seeds = 20;
  int n_pairs = 30;
  double delta = 0.1;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir;
};

struct ConvergeInitResult {
  std::vector<int> widths;
  std::vector<double> mean_abs_dev, max_abs_dev, theory_bound;
  std::vector<double> reduction_factors;  // mean(4m) / mean(m) per width step
  bool strictly_decreasing = false;
  bool all_below_bound = false;
};
ConvergeInitResult run_converge_init(const ConvergeInitConfig& config);

struct StabilityConfig {
  int order = 2;
  int n_train = 16;
  int input_dim = 4;
  std::vector<int> widths = {256, 2048, 4096};
  int envelope_width = 2048;  // width whose runs are held to the loss envelope
  int seeds = 5;
  int steps = 500;
  int record_ntk_every = 10;
  double lr_fraction = 0.5;  // eta0 = fraction * 2/(lambda_min + lambda_max)
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir;
};

struct StabilityResult {
  double lambda_min = 0.0, lambda_max = 0.0, eta0 = 0.0;
  std::vector<int> widths;
  std::vector<double> median_sup_drift;  // per width, median over seeds
  bool envelope_ok = false;              // all seeds at envelope_width
  bool drift_ordered = false;            // median at max width < median at min width
};
StabilityResult run_stability(const StabilityConfig& config);

struct SpectrumConfig {
  int ambient_dim = 4;
  std::vector<int> pnn_orders = {2, 3, 4};
  int mlp_depth = 3;
  int kmax = 44;
  int nodes = 0;  // 0 = 8*kmax
  int fit_lo = 10, fit_hi = 40;
  bool even_only = true;
  int threads = 1;
  std::string out_dir;
};

struct SpectrumResult {
  std::vector<double> pnn_slopes;  // one per configured order
  double mlp_slope = 0.0;
  double margin = 0.0;  // slope(first pnn order) - mlp_slope
  bool pnn_above_mlp = false;
  bool monotone_trend = false;  // slopes non-decreasing in the order sweep
};
SpectrumResult run_spectrum(const SpectrumConfig& config);

struct SpectralBiasConfig {
  std::vector<int> orders = {3, 6, 9};
  int width = 2048;
  int n_samples = 1000;
  int input_dim = 3;
  std::vector<int> degrees = {1, 3, 4, 5, 8, 12};
  int steps = 5000;
  double learning_rate = 0.0016;
  int batch = 50;
  int record_every = 10;
  bool center_init = true;
  double divergence_factor = 50.0;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  int threads = 1;
  std::string out_dir;
};

struct SpectralBiasRun {
  std::uint64_t seed = 0;
  int order = 0;
  std::vector<double> proj_initial, proj_final;  // projection per degree
  std::vector<int> first_passage;  // earliest recorded iter at <= 0.75 * initial; -1 if never
  double kernel_diag_median = 0.0;        // empirical tangent Gram diagonal at init
  double dead_fraction = 0.0;             // rows with diag < 1% of the analytic value
  double realized_rate_k8 = 0.0;          // -log(final/initial) / (lr (B/n) T) for k = 8
  double analytic_rate_k8 = 0.0;          // n * mu_8 of the analytic profile
};

struct SpectralBiasResult {
  std::vector<SpectralBiasRun> runs;
  int k8_decreasing_seeds = 0;  // seeds where the final k=8 projection strictly falls with order
  int seed_count = 0;
  bool k1_fastest_all = false;  // k=1 reaches 0.75x first in every run
};
SpectralBiasResult run_spectral_bias(const SpectralBiasConfig& config);

} // namespace hpntk::experiments
