#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "hpntk/kernels.h"
#include "hpntk/mc.h"
#include "hpntk/rng.h"

using namespace hpntk;

TEST_CASE("oracle matches the closed forms within statistical error") {
  rng::Gaussian g(rng::substream(31, 1));
  for (int rep = 0; rep < 5; ++rep) {
    double x[4], xp[4];
    rng::unit_sphere(x, 4, g);
    rng::unit_sphere(xp, 4, g);
    const auto est = mc::kappa_oracle_all(x, xp, 4, 200000, 77);
    const double closed[4] = {kernels::kappa1(x, xp, 4), kernels::kappa2(x, xp, 4),
                              kernels::kappa3(x, xp, 4), kernels::kappa4(x, xp, 4)};
    for (int k = 0; k < 4; ++k) {
      CHECK(est[k].std_error > 0.0);
      CHECK(est[k].samples == 200000);
      CHECK(std::fabs(est[k].value - closed[k]) <= 4.0 * est[k].std_error);
    }
  }
}

TEST_CASE("standard error halves at 4x the samples") {
  const double x[3] = {1.0, 0.0, 0.0}, xp[3] = {0.6, 0.8, 0.0};
  const auto small = mc::kappa_oracle(mc::Kappa::k2, x, xp, 3, 50000, 5);
  const auto large = mc::kappa_oracle(mc::Kappa::k2, x, xp, 3, 200000, 5);
  const double ratio = large.std_error / small.std_error;
  CHECK(ratio > 0.4);
  CHECK(ratio < 0.6);
}

TEST_CASE("oracle is deterministic in the seed") {
  const double x[2] = {0.8, 0.6}, xp[2] = {1.0, 0.0};
  const auto a = mc::kappa_oracle_all(x, xp, 2, 10000, 3);
  const auto b = mc::kappa_oracle_all(x, xp, 2, 10000, 3);
  for (int k = 0; k < 4; ++k) {
    CHECK(a[k].value == b[k].value);
    CHECK(a[k].std_error == b[k].std_error);
  }
  const auto c = mc::kappa_oracle_all(x, xp, 2, 10000, 4);
  CHECK(a[0].value != c[0].value);
}

TEST_CASE("batch oracle equals the single-pair oracle on each row") {
  Mat X(3, 3), Xp(3, 3);
  rng::Gaussian g(rng::substream(32, 1));
  for (int i = 0; i < 3; ++i) {
    rng::unit_sphere(X.row(i), 3, g);
    rng::unit_sphere(Xp.row(i), 3, g);
  }
  const auto batch = mc::kappa_oracle_batch(X, Xp, 20000, 13);
  REQUIRE(batch.size() == 3);
  for (int i = 0; i < 3; ++i) {
    const auto single = mc::kappa_oracle_all(X.row(i), Xp.row(i), 3, 20000, 13);
    for (int k = 0; k < 4; ++k) CHECK(batch[i][k].value == single[k].value);
  }
}

TEST_CASE("attention block kernel is symmetric and vanishes at zero input") {
  nets::PolyNLSpec spec{64, 3, 11};
  const double x[3] = {0.3, -0.5, 0.81}, xp[3] = {0.9, 0.1, -0.4}, zero[3] = {0.0, 0.0, 0.0};
  const auto kxy = mc::polynl_ntk_mc(spec, x, xp, 4000, 7);
  const auto kyx = mc::polynl_ntk_mc(spec, xp, x, 4000, 7);
  CHECK(kxy.value == kyx.value);
  CHECK(mc::polynl_ntk_mc(spec, zero, xp, 1000, 7).value == 0.0);

  const auto again = mc::polynl_ntk_mc(spec, x, xp, 4000, 7);
  CHECK(again.value == kxy.value);
  // self kernel is a mean of squares
  CHECK(mc::polynl_ntk_mc(spec, x, x, 4000, 7).value >= 0.0);

  CHECK_THROWS_AS(mc::polynl_ntk_mc(spec, x, xp, 0, 7), std::invalid_argument);
}
