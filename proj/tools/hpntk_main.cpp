// Command-line front end. Exit codes: 0 success (including --help), 2 argument
// or config errors, 3 numerical failures (divergence, ill-conditioning).
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hpntk/experiments.h"
#include "hpntk/io.h"
#include "hpntk/kernels.h"
#include "hpntk/regress.h"
#include "hpntk/simd.h"

namespace {

namespace fs = std::filesystem;
using namespace hpntk;
using nlohmann::json;

kernels::Family family_of(const std::string& name) {
  if (name == "pnn") return kernels::Family::pnn;
  if (name == "mlp") return kernels::Family::mlp;
  if (name == "mfn") return kernels::Family::mfn;
  if (name == "polynl") return kernels::Family::polynl;
  throw std::invalid_argument("unknown family: " + name);
}

std::string family_name(kernels::Family f) {
  switch (f) {
    case kernels::Family::pnn: return "pnn";
    case kernels::Family::mlp: return "mlp";
    case kernels::Family::mfn: return "mfn";
    case kernels::Family::polynl: return "polynl";
  }
  throw std::invalid_argument("bad family enum");
}

std::vector<double> parse_vec(const std::string& s) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = std::min(s.find(',', pos), s.size());
    const std::string tok = s.substr(pos, comma - pos);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad number in vector: '" + tok + "'");
    }
    if (used != tok.size()) throw std::invalid_argument("bad number in vector: '" + tok + "'");
    out.push_back(v);
    pos = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty vector");
  return out;
}

// HPNTK_THREADS, when set, wins over the --threads flag
int resolve_threads(int flag_value) {
  if (const char* env = std::getenv("HPNTK_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1)
      throw std::invalid_argument("HPNTK_THREADS must be a positive integer");
    return static_cast<int>(v);
  }
  if (flag_value < 1) throw std::invalid_argument("--threads must be >= 1");
  return flag_value;
}

struct KernelFlags {
  std::string family = "pnn";
  int degree = 2;
  std::string x, xp;
  std::int64_t mc_samples = 200000;
  int mc_width = 256;
};

kernels::KernelModel make_model(const KernelFlags& flags, int input_dim, std::uint64_t seed) {
  kernels::KernelModel model;
  model.family = family_of(flags.family);
  model.n = flags.degree;
  model.input_dim = input_dim;
  model.mc_samples = flags.mc_samples;
  model.mc_seed = seed;
  model.mc_width = flags.mc_width;
  return model;
}

void run_kernel(const KernelFlags& flags, std::uint64_t seed) {
  const std::vector<double> x = parse_vec(flags.x);
  const std::vector<double> xp = parse_vec(flags.xp);
  if (x.size() != xp.size()) throw std::invalid_argument("--x and --xp disagree on dimension");
  const kernels::KernelModel model = make_model(flags, static_cast<int>(x.size()), seed);
  std::cout << io::fmt(regress::kernel_value(model, x.data(), xp.data())) << "\n";
}

void run_gram(const KernelFlags& flags, const std::string& data_path, const std::string& out_dir,
              std::uint64_t seed) {
  if (out_dir.empty()) throw std::invalid_argument("--out is required");
  const regress::Dataset data = regress::read_dataset_csv(data_path);
  const kernels::KernelModel model = make_model(flags, static_cast<int>(data.X.cols), seed);
  const regress::GramMatrix gram = regress::assemble_gram(model, data.X);

  fs::create_directories(out_dir);
  io::CsvWriter csv((fs::path(out_dir) / "gram.csv").string());
  std::vector<std::string> names, fields;
  for (std::size_t j = 0; j < gram.entries.cols; ++j) names.push_back("k" + std::to_string(j + 1));
  csv.header(names);
  for (std::size_t i = 0; i < gram.entries.rows; ++i) {
    fields.clear();
    for (std::size_t j = 0; j < gram.entries.cols; ++j) fields.push_back(io::fmt(gram.entries(i, j)));
    csv.row(fields);
  }
  csv.close();
  io::write_json((fs::path(out_dir) / "gram.json").string(),
                 json{{"family", flags.family},
                      {"degree", flags.degree},
                      {"n", gram.entries.rows},
                      {"input_dim", data.X.cols},
                      {"jitter_applied", gram.jitter_applied}});
  std::cout << "wrote " << out_dir << "/gram.csv (" << gram.entries.rows << " rows)\n";
}

void run_fit(const KernelFlags& flags, const std::string& data_path, const std::string& out_dir,
             double jitter, std::uint64_t seed) {
  if (out_dir.empty()) throw std::invalid_argument("--out is required");
  const regress::Dataset data = regress::read_dataset_csv(data_path);
  const kernels::KernelModel kernel = make_model(flags, static_cast<int>(data.X.cols), seed);
  const regress::RegressionModel model = regress::fit(kernel, data, jitter);

  fs::create_directories(out_dir);
  io::write_json((fs::path(out_dir) / "model.json").string(),
                 json{{"family", family_name(model.kernel.family)},
                      {"degree", model.kernel.n},
                      {"input_dim", model.kernel.input_dim},
                      {"mc_samples", model.kernel.mc_samples},
                      {"mc_seed", model.kernel.mc_seed},
                      {"mc_width", model.kernel.mc_width},
                      {"jitter", model.jitter},
                      {"residual_inf", model.residual_inf}});

  io::CsvWriter acsv((fs::path(out_dir) / "alpha.csv").string());
  acsv.header({"alpha"});
  for (double a : model.alpha) acsv.row({io::fmt(a)});
  acsv.close();

  io::CsvWriter dcsv((fs::path(out_dir) / "train_data.csv").string());
  std::vector<std::string> names, fields;
  for (std::size_t j = 0; j < data.X.cols; ++j) names.push_back("x" + std::to_string(j + 1));
  names.push_back("y");
  dcsv.header(names);
  for (std::size_t i = 0; i < data.X.rows; ++i) {
    fields.clear();
    for (std::size_t j = 0; j < data.X.cols; ++j) fields.push_back(io::fmt(data.X(i, j)));
    fields.push_back(io::fmt(data.y[i]));
    dcsv.row(fields);
  }
  dcsv.close();
  std::cout << "wrote " << out_dir << " (jitter " << io::fmt(model.jitter) << ", residual "
            << io::fmt(model.residual_inf) << ")\n";
}

regress::RegressionModel load_model(const std::string& dir) {
  const json meta = json::parse(io::read_text((fs::path(dir) / "model.json").string()));
  regress::RegressionModel model;
  model.kernel.family = family_of(meta.at("family").get<std::string>());
  model.kernel.n = meta.at("degree").get<int>();
  model.kernel.input_dim = meta.at("input_dim").get<int>();
  model.kernel.mc_samples = meta.at("mc_samples").get<std::int64_t>();
  model.kernel.mc_seed = meta.at("mc_seed").get<std::uint64_t>();
  model.kernel.mc_width = meta.at("mc_width").get<int>();
  model.jitter = meta.at("jitter").get<double>();
  model.residual_inf = meta.at("residual_inf").get<double>();
  model.data = regress::read_dataset_csv((fs::path(dir) / "train_data.csv").string());

  const std::string atext = io::read_text((fs::path(dir) / "alpha.csv").string());
  std::size_t pos = atext.find('\n');
  if (pos == std::string::npos || atext.substr(0, pos) != "alpha")
    throw std::runtime_error("alpha.csv: bad header");
  ++pos;
  while (pos < atext.size()) {
    std::size_t eol = std::min(atext.find('\n', pos), atext.size());
    model.alpha.push_back(std::stod(atext.substr(pos, eol - pos)));
    pos = eol + 1;
  }
  if (model.alpha.size() != model.data.X.rows)
    throw std::runtime_error("alpha.csv row count does not match training data");
  return model;
}

void run_predict(const std::string& model_dir, const std::string& x_str) {
  const regress::RegressionModel model = load_model(model_dir);
  const std::vector<double> x = parse_vec(x_str);
  if (x.size() != model.data.X.cols)
    throw std::invalid_argument("--x dimension does not match the model");
  std::cout << io::fmt(regress::predict(model, x.data())) << "\n";
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"analytic tangent kernels for product networks: closed forms, finite-width "
               "checks, regression, training traces, sphere spectra"};
  app.require_subcommand(1);
  app.fallthrough(); // subcommands inherit this at creation: --seed/--threads/--out parse anywhere
  app.set_config("--config", "", "read defaults from a TOML/INI file; flags override it");

  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir;
  app.add_option("--seed", seed, "master seed; all randomness derives from it")
      ->capture_default_str();
  app.add_option("--threads", threads, "worker count (HPNTK_THREADS overrides)")
      ->capture_default_str();
  app.add_option("--out", out_dir, "output directory for files");

  KernelFlags kf;
  const auto add_kernel_flags = [&](CLI::App* sub, bool need_points) {
    sub->add_option("--family", kf.family, "pnn | mlp | mfn | polynl")->capture_default_str();
    sub->add_option("--degree", kf.degree, "product order (pnn/mfn) or layer count (mlp)")
        ->capture_default_str();
    if (need_points) {
      sub->add_option("--x", kf.x, "first input, comma separated")->required();
      sub->add_option("--xp", kf.xp, "second input, comma separated")->required();
    }
    sub->add_option("--mc-samples", kf.mc_samples, "Monte Carlo draws (polynl only)")
        ->capture_default_str();
    sub->add_option("--mc-width", kf.mc_width, "feature width (polynl only)")
        ->capture_default_str();
  };

  CLI::App* kernel = app.add_subcommand("kernel", "print one kernel value");
  add_kernel_flags(kernel, true);
  kernel->callback([&] { run_kernel(kf, seed); });

  std::string data_path;
  CLI::App* gram = app.add_subcommand("gram", "kernel matrix of a dataset");
  add_kernel_flags(gram, false);
  gram->add_option("--data", data_path, "dataset CSV with header x1..xd,y (y ignored)")
      ->required();
  gram->callback([&] { run_gram(kf, data_path, out_dir, seed); });

  double jitter = 0.0;
  CLI::App* fit = app.add_subcommand("fit", "kernel regression on a dataset");
  add_kernel_flags(fit, false);
  fit->add_option("--data", data_path, "dataset CSV with header x1..xd,y")->required();
  fit->add_option("--jitter", jitter, "initial ridge term (0 = interpolation)")
      ->capture_default_str();
  fit->callback([&] { run_fit(kf, data_path, out_dir, jitter, seed); });

  std::string model_dir, x_str;
  CLI::App* predict = app.add_subcommand("predict", "evaluate a fitted model");
  predict->add_option("--model", model_dir, "directory written by fit")->required();
  predict->add_option("--x", x_str, "input, comma separated")->required();
  predict->callback([&] { run_predict(model_dir, x_str); });

  experiments::ConvergeInitConfig ci;
  CLI::App* converge = app.add_subcommand(
      "converge-init", "finite-width kernel vs analytic limit at initialization");
  converge->add_option("--order", ci.order)->capture_default_str();
  converge->add_option("--dim", ci.input_dim)->capture_default_str();
  converge->add_option("--widths", ci.widths)->delimiter(',')->capture_default_str();
  converge->add_option("--net-seeds", ci.seeds, "independent draws per width")
      ->capture_default_str();
  converge->add_option("--pairs", ci.n_pairs)->capture_default_str();
  converge->add_option("--delta", ci.delta, "failure probability in the deviation bound")
      ->capture_default_str();
  converge->callback([&] {
    ci.seed = seed;
    ci.threads = resolve_threads(threads);
    ci.out_dir = out_dir;
    const auto res = experiments::run_converge_init(ci);
    std::cout << "decreasing=" << (res.strictly_decreasing ? "yes" : "no")
              << " below_bound=" << (res.all_below_bound ? "yes" : "no") << "\n";
  });

  experiments::StabilityConfig st;
  CLI::App* stability =
      app.add_subcommand("stability", "gradient descent traces against the analytic envelope");
  stability->add_option("--order", st.order)->capture_default_str();
  stability->add_option("--n-train", st.n_train)->capture_default_str();
  stability->add_option("--dim", st.input_dim)->capture_default_str();
  stability->add_option("--widths", st.widths)->delimiter(',')->capture_default_str();
  stability->add_option("--envelope-width", st.envelope_width)->capture_default_str();
  stability->add_option("--net-seeds", st.seeds)->capture_default_str();
  stability->add_option("--steps", st.steps)->capture_default_str();
  stability->add_option("--record-every", st.record_ntk_every)->capture_default_str();
  stability->add_option("--lr-fraction", st.lr_fraction, "eta0 as a fraction of the stable limit")
      ->capture_default_str();
  stability->callback([&] {
    st.seed = seed;
    st.threads = resolve_threads(threads);
    st.out_dir = out_dir;
    const auto res = experiments::run_stability(st);
    std::cout << "eta0=" << io::fmt(res.eta0)
              << " envelope_ok=" << (res.envelope_ok ? "yes" : "no")
              << " drift_ordered=" << (res.drift_ordered ? "yes" : "no") << "\n";
  });

  experiments::ExtrapolationConfig ex;
  CLI::App* extrap =
      app.add_subcommand("extrapolate", "ray extrapolation of fitted kernel regressors");
  extrap->add_option("--target", ex.target, "poly3 | cos2x | quad2d")->capture_default_str();
  extrap->add_option("--order", ex.order)->capture_default_str();
  extrap->add_option("--n-train", ex.n_train)->capture_default_str();
  extrap->add_option("--base-t", ex.base_t)->capture_default_str();
  extrap->add_option("--h-max", ex.h_max)->capture_default_str();
  extrap->add_option("--h-steps", ex.h_steps)->capture_default_str();
  extrap->callback([&] {
    ex.seed = seed;
    ex.threads = resolve_threads(threads);
    ex.out_dir = out_dir;
    const auto res = experiments::run_extrapolation(ex);
    std::cout << "pnn_degree=" << res.pnn_best_degree << " mlp_degree=" << res.mlp_best_degree
              << " pnn_r2=" << io::fmt(res.pnn_degree_r2) << "\n";
  });

  experiments::ExactExtrapolationConfig ee;
  std::string beta_str;
  CLI::App* exact = app.add_subcommand(
      "exact-extrapolate", "quadratic recovery from few points, off the training sphere");
  exact->add_option("--beta", beta_str, "row-major 2x2 target form, comma separated (default identity)");
  exact->add_option("--n-random", ee.n_random)->capture_default_str();
  exact->add_option("--radii", ee.radii)->delimiter(',')->capture_default_str();
  exact->add_option("--n-angles", ee.n_angles)->capture_default_str();
  exact->callback([&] {
    if (!beta_str.empty()) ee.beta = parse_vec(beta_str);
    ee.seed = seed;
    ee.threads = resolve_threads(threads);
    ee.out_dir = out_dir;
    const auto res = experiments::run_exact_extrapolation(ee);
    std::cout << "median_rel_err=" << io::fmt(res.median_rel_err)
              << " ablation_ratio=" << io::fmt(res.ablation_ratio) << "\n";
  });

  experiments::SpectrumConfig sp;
  CLI::App* spectrum = app.add_subcommand("spectrum", "sphere eigenvalue decay of the kernels");
  spectrum->add_option("--dim", sp.ambient_dim)->capture_default_str();
  spectrum->add_option("--orders", sp.pnn_orders)->delimiter(',')->capture_default_str();
  spectrum->add_option("--mlp-depth", sp.mlp_depth)->capture_default_str();
  spectrum->add_option("--kmax", sp.kmax)->capture_default_str();
  spectrum->add_option("--nodes", sp.nodes, "quadrature nodes (0 = 8*kmax)")
      ->capture_default_str();
  spectrum->add_option("--fit-lo", sp.fit_lo)->capture_default_str();
  spectrum->add_option("--fit-hi", sp.fit_hi)->capture_default_str();
  spectrum->add_flag("--even-only,!--all-degrees", sp.even_only,
                     "restrict the slope fit to even degrees");
  spectrum->callback([&] {
    sp.threads = resolve_threads(threads);
    sp.out_dir = out_dir;
    const auto res = experiments::run_spectrum(sp);
    std::cout << "margin=" << io::fmt(res.margin)
              << " monotone_trend=" << (res.monotone_trend ? "yes" : "no") << "\n";
  });

  experiments::SpectralBiasConfig sb;
  CLI::App* bias = app.add_subcommand(
      "spectral-bias", "SGD on a harmonic mixture, residual projections per degree");
  bias->add_option("--orders", sb.orders)->delimiter(',')->capture_default_str();
  bias->add_option("--width", sb.width)->capture_default_str();
  bias->add_option("--n-samples", sb.n_samples)->capture_default_str();
  bias->add_option("--dim", sb.input_dim)->capture_default_str();
  bias->add_option("--degrees", sb.degrees)->delimiter(',')->capture_default_str();
  bias->add_option("--steps", sb.steps)->capture_default_str();
  bias->add_option("--lr", sb.learning_rate)->capture_default_str();
  bias->add_option("--batch", sb.batch)->capture_default_str();
  bias->add_option("--record-every", sb.record_every)->capture_default_str();
  bias->add_flag("--center-init,!--no-center-init", sb.center_init,
                 "subtract the untrained predictor");
  bias->add_option("--divergence-factor", sb.divergence_factor)->capture_default_str();
  bias->add_option("--bias-seeds", sb.seeds)->delimiter(',')->capture_default_str();
  bias->callback([&] {
    sb.threads = resolve_threads(threads);
    sb.out_dir = out_dir;
    const auto res = experiments::run_spectral_bias(sb);
    std::cout << "k8_decreasing_seeds=" << res.k8_decreasing_seeds << "/" << res.seed_count
              << " k1_fastest_all=" << (res.k1_fastest_all ? "yes" : "no") << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
