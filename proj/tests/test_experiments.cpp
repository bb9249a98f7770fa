#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hpntk/experiments.h"
#include "hpntk/io.h"

using namespace hpntk;
namespace fs = std::filesystem;

namespace {

std::string fresh_dir(const std::string& name) {
  const std::string dir = (fs::temp_directory_path() / ("hpntk_exp_" + name)).string();
  fs::remove_all(dir);
  return dir;
}

nlohmann::json sidecar(const std::string& dir, const std::string& file) {
  return nlohmann::json::parse(io::read_text(dir + "/" + file));
}

} // namespace

TEST_CASE("ray degree fits classify exact polynomials") {
  std::vector<double> h, cubic, affine, constant;
  for (int i = 0; i <= 12; ++i) {
    const double t = 0.2 * i;
    h.push_back(t);
    cubic.push_back(2.0 * t * t * t - t);
    affine.push_back(3.0 + 0.5 * t);
    constant.push_back(4.0);
  }
  CHECK(experiments::ray_poly_degree_fit(h, cubic, 5).best_degree == 3);
  CHECK(experiments::ray_poly_degree_fit(h, affine, 5).best_degree == 1);
  CHECK(experiments::ray_poly_degree_fit(h, constant, 5).best_degree == 0);
  CHECK(experiments::poly_fit_r2(h, cubic, 3) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(experiments::poly_fit_r2(h, cubic, 1) < 0.999);
  CHECK_THROWS_AS(experiments::ray_poly_degree_fit(h, cubic, 50), std::invalid_argument);
}

TEST_CASE("extrapolation driver writes csv plus sidecar and is repeatable") {
  experiments::ExtrapolationConfig config;
  config.n_train = 12;
  config.h_steps = 11;
  config.out_dir = fresh_dir("extrap");
  const auto res = experiments::run_extrapolation(config);
  REQUIRE(res.h.size() == 11);
  CHECK(res.f_pnn.size() == 11);
  CHECK(fs::exists(config.out_dir + "/extrapolation.csv"));

  const auto meta = sidecar(config.out_dir, "extrapolation.json");
  CHECK(meta.contains("version"));
  CHECK(meta.contains("duration_seconds"));
  CHECK(meta["config"]["n_train"] == 12);

  const auto res2 = experiments::run_extrapolation(config);
  CHECK(res2.f_pnn == res.f_pnn);
  CHECK(res2.f_mlp == res.f_mlp);
  fs::remove_all(config.out_dir);

  config.target = "unknown";
  CHECK_THROWS_AS(experiments::run_extrapolation(config), std::invalid_argument);
}

TEST_CASE("width sweep driver reports per-width statistics") {
  experiments::ConvergeInitConfig config;
  config.widths = {64, 128};
  config.seeds = 2;
  config.n_pairs = 2;
  config.out_dir = fresh_dir("converge");
  const auto res = experiments::run_converge_init(config);
  REQUIRE(res.mean_abs_dev.size() == 2);
  CHECK(res.reduction_factors.size() == 1);
  CHECK(res.theory_bound[0] > res.theory_bound[1]);
  for (double dev : res.mean_abs_dev) CHECK(dev > 0.0);
  CHECK(fs::exists(config.out_dir + "/converge_init.csv"));
  fs::remove_all(config.out_dir);
}

TEST_CASE("spectrum driver emits slopes") {
  experiments::SpectrumConfig config;
  config.kmax = 24;
  config.fit_lo = 2;
  config.fit_hi = 24;
  config.pnn_orders = {2, 3};
  config.out_dir = fresh_dir("spectrum");
  const auto res = experiments::run_spectrum(config);
  REQUIRE(res.pnn_slopes.size() == 2);
  CHECK(std::isfinite(res.mlp_slope));
  CHECK(res.margin == doctest::Approx(res.pnn_slopes[0] - res.mlp_slope));
  CHECK(fs::exists(config.out_dir + "/spectrum_pnn2.csv"));
  CHECK(fs::exists(config.out_dir + "/spectrum_mlp3.csv"));
  fs::remove_all(config.out_dir);
}

TEST_CASE("training bias driver runs a miniature sweep") {
  experiments::SpectralBiasConfig config;
  config.orders = {2};
  config.width = 64;
  config.n_samples = 60;
  config.steps = 30;
  config.batch = 20;
  config.record_every = 10;
  config.seeds = {1};
  config.out_dir = fresh_dir("bias");
  const auto res = experiments::run_spectral_bias(config);
  REQUIRE(res.runs.size() == 1);
  CHECK(res.runs[0].proj_initial.size() == config.degrees.size());
  CHECK(res.runs[0].proj_final.size() == config.degrees.size());
  CHECK(res.runs[0].kernel_diag_median > 0.0);
  CHECK(fs::exists(config.out_dir + "/spectral_bias_s1.csv"));
  const auto meta = sidecar(config.out_dir, "spectral_bias.json");
  CHECK(meta["results"]["runs"].size() == 1);
  fs::remove_all(config.out_dir);
}

TEST_CASE("exact quadratic driver reports both arms") {
  experiments::ExactExtrapolationConfig config;
  config.radii = {1.5, 2.0};
  config.n_angles = 8;
  config.out_dir = fresh_dir("exact");
  const auto res = experiments::run_exact_extrapolation(config);
  CHECK(res.median_rel_err >= 0.0);
  CHECK(res.ablation_median_rel_err >= 0.0);
  CHECK(fs::exists(config.out_dir + "/exact_extrapolation.csv"));
  CHECK(fs::exists(config.out_dir + "/exact_extrapolation_ablation.csv"));
  fs::remove_all(config.out_dir);
}

TEST_CASE("drivers demand an output directory") {
  experiments::ExtrapolationConfig config;
  CHECK_THROWS_AS(experiments::run_extrapolation(config), std::invalid_argument);
}
