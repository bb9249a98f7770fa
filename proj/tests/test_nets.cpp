#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include "hpntk/kernels.h"
#include "hpntk/nets.h"
#include "hpntk/rng.h"
#include "hpntk/simd.h"

using namespace hpntk;
using kernels::Family;

TEST_CASE("initialization is deterministic and validated") {
  nets::ArchSpec spec{Family::pnn, 2, 16, 3, 7};
  const auto a = nets::init_params(spec);
  const auto b = nets::init_params(spec);
  CHECK(a.W[0].a == b.W[0].a);
  CHECK(a.w_out == b.w_out);
  CHECK(a.theta_size() == 2 * 16 * 3 + 16);
  CHECK(a.trainable_size() == 2 * 16 * 3);

  spec.seed = 8;
  const auto c = nets::init_params(spec);
  CHECK(a.W[0].a != c.W[0].a);

  CHECK_THROWS_AS(nets::init_params({Family::pnn, 1, 16, 3, 7}), std::invalid_argument);
  CHECK_THROWS_AS(nets::init_params({Family::pnn, 2, 0, 3, 7}), std::invalid_argument);
  CHECK_THROWS_AS(nets::init_params({Family::mlp, 2, 16, 3, 7}), std::invalid_argument);
}

TEST_CASE("forward vanishes at the origin and is positively homogeneous") {
  rng::Gaussian g(rng::substream(41, 1));
  for (int N : {2, 3}) {
    const auto p = nets::init_params({Family::pnn, N, 32, 4, 5});
    const double zero[4] = {0.0, 0.0, 0.0, 0.0};
    CHECK(nets::forward(p, zero) == 0.0);
    for (int rep = 0; rep < 4; ++rep) {
      double x[4], cx[4];
      rng::unit_sphere(x, 4, g);
      const double c = 0.5 + std::fabs(g.next());
      for (int i = 0; i < 4; ++i) cx[i] = c * x[i];
      CHECK(nets::forward(p, cx) ==
            doctest::Approx(std::pow(c, N) * nets::forward(p, x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("euler identity ties the gradient to the output") {
  // f is degree N+1 in (W_1..W_N, w_out) jointly, so <theta, grad f> = (N+1) f
  rng::Gaussian g(rng::substream(42, 1));
  for (int N : {2, 3}) {
    const auto p = nets::init_params({Family::pnn, N, 48, 5, 9});
    std::vector<double> theta(p.theta_size()), jac(p.theta_size());
    nets::flatten(p, theta.data());
    for (int rep = 0; rep < 3; ++rep) {
      double x[5];
      rng::unit_sphere(x, 5, g);
      nets::jacobian(p, x, jac.data());
      const double lhs = simd::dot(theta.data(), jac.data(), theta.size());
      const double rhs = (N + 1.0) * nets::forward(p, x);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
  }
}

TEST_CASE("analytic gradients match central differences") {
  rng::Gaussian g(rng::substream(43, 1));
  double x4[4], x3[3];
  rng::unit_sphere(x4, 4, g);
  rng::unit_sphere(x3, 3, g);
  const auto pnn = nets::init_params({Family::pnn, 3, 64, 4, 3});
  CHECK(nets::finite_diff_check(pnn, x4, 1e-5) <= 1e-5);
  const auto mfn = nets::init_params({Family::mfn, 2, 32, 3, 3});
  CHECK(nets::finite_diff_check(mfn, x3, 1e-5) <= 1e-5);
}

TEST_CASE("gradient factors reassemble the jacobian") {
  const auto p = nets::init_params({Family::pnn, 2, 24, 3, 13});
  const double x[3] = {0.36, -0.8, 0.48};
  std::vector<double> jac(p.theta_size());
  nets::jacobian(p, x, jac.data());

  Mat U;
  std::vector<double> wout_block;
  nets::gradient_factors(p, x, U, wout_block);
  REQUIRE(U.rows == 2);
  REQUIRE(U.cols == 24);
  REQUIRE(wout_block.size() == 24);
  std::size_t off = 0;
  for (int l = 0; l < 2; ++l)
    for (int r = 0; r < 24; ++r)
      for (int j = 0; j < 3; ++j) CHECK(jac[off++] == U(l, r) * x[j]);
  for (int r = 0; r < 24; ++r) CHECK(jac[off++] == wout_block[r]);
}

TEST_CASE("empirical kernel is symmetric, psd, and matches jacobian dots") {
  const auto p = nets::init_params({Family::pnn, 2, 40, 3, 21});
  Mat X(4, 3);
  rng::Gaussian g(rng::substream(44, 1));
  for (int i = 0; i < 4; ++i) rng::unit_sphere(X.row(i), 3, g);
  const Mat K = nets::empirical_ntk(p, X);
  REQUIRE(K.rows == 4);

  std::vector<double> ji(p.theta_size()), jj(p.theta_size());
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      CHECK(K(i, j) == K(j, i));
      nets::jacobian(p, X.row(i), ji.data());
      nets::jacobian(p, X.row(j), jj.data());
      CHECK(K(i, j) ==
            doctest::Approx(simd::dot(ji.data(), jj.data(), ji.size())).epsilon(1e-10));
    }
  // 2x2 principal minors are nonnegative
  for (int i = 0; i < 4; ++i) {
    CHECK(K(i, i) >= 0.0);
    for (int j = 0; j < 4; ++j)
      CHECK(K(i, i) * K(j, j) - K(i, j) * K(i, j) >= -1e-9);
  }
}

TEST_CASE("wide networks concentrate on the analytic kernel") {
  // mean over seeds of K^(x,x) should sit near 2N+2 at moderate width
  const int N = 2, m = 2048, d = 4;
  const double x[4] = {0.5, -0.5, 0.5, 0.5};
  double mean = 0.0;
  const int reps = 8;
  std::vector<double> jac;
  for (int s = 0; s < reps; ++s) {
    const auto p = nets::init_params({Family::pnn, N, m, d, 100 + static_cast<std::uint64_t>(s)});
    jac.resize(p.theta_size());
    nets::jacobian(p, x, jac.data());
    mean += simd::dot(jac.data(), jac.data(), jac.size());
  }
  mean /= reps;
  CHECK(mean == doctest::Approx(2.0 * N + 2.0).epsilon(0.15));
}

TEST_CASE("flatten round-trips and rejects the attention family") {
  auto p = nets::init_params({Family::mfn, 2, 16, 3, 31});
  std::vector<double> theta(p.theta_size());
  nets::flatten(p, theta.data());
  auto q = nets::init_params({Family::mfn, 2, 16, 3, 32});
  nets::unflatten(q, theta.data());
  CHECK(q.W[0].a == p.W[0].a);
  CHECK(q.W[1].a == p.W[1].a);
  CHECK(q.w_out == p.w_out);

  auto poly = nets::polynl_init({16, 3, 5});
  CHECK_THROWS_AS(nets::flatten(poly, theta.data()), std::invalid_argument);
}

TEST_CASE("attention block forward is deterministic and finite") {
  const auto p = nets::polynl_init({32, 3, 5});
  const double x[3] = {0.3, 0.9, -0.3};
  const double f1 = nets::polynl_forward(p, x);
  const double f2 = nets::polynl_forward(p, x);
  CHECK(f1 == f2);
  CHECK(std::isfinite(f1));
  const double zero[3] = {0.0, 0.0, 0.0};
  CHECK(nets::polynl_forward(p, zero) == 0.0);
}

TEST_CASE("sinusoidal product network differs from relu product network") {
  const auto a = nets::init_params({Family::pnn, 2, 16, 3, 7});
  const auto b = nets::init_params({Family::mfn, 2, 16, 3, 7});
  const double x[3] = {0.6, 0.0, 0.8};
  CHECK(nets::forward(a, x) != nets::forward(b, x));
}
