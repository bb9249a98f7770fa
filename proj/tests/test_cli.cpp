#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "hpntk/io.h"

#ifndef HPNTK_CLI_PATH
#error "HPNTK_CLI_PATH must point at the command-line binary"
#endif

namespace fs = std::filesystem;
using hpntk::io::read_text;
using hpntk::io::write_text;

namespace {

struct RunResult {
  int exit_code;
  std::string out;
};

const std::string kWork = (fs::temp_directory_path() / "hpntk_cli_test").string();

RunResult run_cli(const std::string& args) {
  fs::create_directories(kWork);
  const std::string out_file = kWork + "/stdout.txt";
  const std::string cmd =
      std::string(HPNTK_CLI_PATH) + " " + args + " > " + out_file + " 2>" + kWork + "/stderr.txt";
  const int status = std::system(cmd.c_str());
  RunResult res;
  res.exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  res.out = read_text(out_file);
  return res;
}

} // namespace

TEST_CASE("kernel subcommand prints closed-form values") {
  auto res = run_cli("kernel --family pnn --degree 2 --x 1,0 --xp 1,0");
  CHECK(res.exit_code == 0);
  CHECK(res.out == "6\n");

  res = run_cli("kernel --family mlp --degree 2 --x 1,0 --xp 1,0");
  CHECK(res.exit_code == 0);
  CHECK(res.out == "2\n");

  res = run_cli("kernel --family polynl --degree 1 --x 1,0 --xp 1,0 --mc-samples 2000 --mc-width 32");
  CHECK(res.exit_code == 0);
  CHECK(std::stod(res.out) >= 0.0);
}

TEST_CASE("argument errors exit 2, help exits 0") {
  CHECK(run_cli("kernel --no-such-flag").exit_code == 2);
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("no-such-subcommand").exit_code == 2);
  CHECK(run_cli("kernel --family pnn --degree 2 --x 1,0 --xp 1,0,0").exit_code == 2);
  CHECK(run_cli("kernel --family what --degree 2 --x 1,0 --xp 1,0").exit_code == 2);
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("kernel --help").exit_code == 0);
}

TEST_CASE("runtime failures exit 3") {
  CHECK(run_cli("fit --data /nonexistent.csv --family pnn --degree 2 --out " + kWork + "/f")
            .exit_code == 3);
}

TEST_CASE("fit then predict round-trips the training data") {
  fs::create_directories(kWork);
  const std::string data = kWork + "/train.csv";
  write_text(data, "x1,x2,y\n1,0,2\n0,1,3\n-0.6,0.8,1.5\n");
  const std::string model = kWork + "/model";
  auto res = run_cli("fit --data " + data + " --family pnn --degree 2 --out " + model);
  CHECK(res.exit_code == 0);
  CHECK(fs::exists(model + "/model.json"));
  CHECK(fs::exists(model + "/alpha.csv"));
  CHECK(fs::exists(model + "/train_data.csv"));

  res = run_cli("predict --model " + model + " --x 1,0");
  CHECK(res.exit_code == 0);
  CHECK(std::stod(res.out) == doctest::Approx(2.0).epsilon(1e-6));

  res = run_cli("predict --model " + model + " --x 0,1");
  CHECK(std::stod(res.out) == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("gram subcommand writes the kernel matrix") {
  fs::create_directories(kWork);
  const std::string data = kWork + "/gram_data.csv";
  write_text(data, "x1,x2,y\n1,0,0\n0,1,0\n");
  const std::string out = kWork + "/gram";
  const auto res = run_cli("gram --data " + data + " --family pnn --degree 2 --out " + out);
  CHECK(res.exit_code == 0);
  const std::string csv = read_text(out + "/gram.csv");
  CHECK(csv.substr(0, 6) == "k1,k2\n");
  CHECK(csv.find("6,") != std::string::npos);
}

TEST_CASE("experiment reruns are byte-identical through the cli") {
  const std::string a = kWork + "/rerun_a", b = kWork + "/rerun_b";
  const std::string flags = "extrapolate --n-train 10 --h-steps 9 --seed 5 --out ";
  CHECK(run_cli(flags + a).exit_code == 0);
  CHECK(run_cli(flags + b).exit_code == 0);
  CHECK(read_text(a + "/extrapolation.csv") == read_text(b + "/extrapolation.csv"));
  CHECK(read_text(a + "/extrapolation.csv").size() > 0);
}

TEST_CASE("config file supplies defaults, flags override") {
  fs::create_directories(kWork);
  const std::string cfg = kWork + "/config.toml";
  write_text(cfg, "seed=9\n");
  const auto res =
      run_cli("--config " + cfg + " kernel --family pnn --degree 2 --x 1,0 --xp 1,0");
  CHECK(res.exit_code == 0);
  CHECK(res.out == "6\n");
}

TEST_CASE("bad thread environment rejected") {
  const std::string cmd = "HPNTK_THREADS=abc " + std::string(HPNTK_CLI_PATH) +
                          " converge-init --widths 32,64 --net-seeds 1 --pairs 1 --out " + kWork +
                          "/threads_bad > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(status) == 2);
}
