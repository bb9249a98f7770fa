#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include "hpntk/kernels.h"
#include "hpntk/rng.h"

using namespace hpntk;

namespace {
const double e1[2] = {1.0, 0.0};
const double e2[2] = {0.0, 1.0};
constexpr double kPi = 3.14159265358979323846;
} // namespace

TEST_CASE("arc-cosine values at right angles and coincidence") {
  CHECK(kernels::kappa1(e1, e2, 2) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(kernels::kappa2(e1, e2, 2) == doctest::Approx(1.0 / kPi).epsilon(1e-14));
  CHECK(kernels::kappa1(e1, e1, 2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(kernels::kappa2(e1, e1, 2) == doctest::Approx(1.0).epsilon(1e-14));
  // norms factor out of kappa2
  const double a[2] = {2.0, 0.0}, b[2] = {0.0, 3.0};
  CHECK(kernels::kappa2(a, b, 2) == doctest::Approx(6.0 / kPi).epsilon(1e-14));

  CHECK(kernels::kappa3(e1, e2, 2) == doctest::Approx(0.7357588823428847).epsilon(1e-14));
  CHECK(kernels::kappa4(e1, e2, 2) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(kernels::kappa3(e1, e1, 2) == doctest::Approx(1.1353352832366128).epsilon(1e-14));
  CHECK(kernels::kappa4(e1, e1, 2) == doctest::Approx(0.8646647167633873).epsilon(1e-14));

  CHECK_THROWS_AS(kernels::kappa1(e1, std::vector<double>{0.0, 0.0}.data(), 2),
                  std::domain_error);
}

TEST_CASE("closed forms at a generic angle") {
  const double x[2] = {0.6, 0.8};
  CHECK(kernels::kappa1(x, e1, 2) == doctest::Approx(0.7048327646991335).epsilon(1e-14));
  CHECK(kernels::kappa2(x, e1, 2) == doctest::Approx(0.6775475677665126).epsilon(1e-14));
  CHECK(kernels::pnn_ntk(2, x, e1, 2) == doctest::Approx(2.064279954142341).epsilon(1e-14));
}

TEST_CASE("product network kernel on the sphere") {
  for (int N = 1; N <= 4; ++N)
    CHECK(kernels::pnn_ntk(N, e1, e1, 2) == doctest::Approx(2.0 * N + 2.0).epsilon(1e-14));
  // orthogonal pair keeps only the kappa2^N term
  CHECK(kernels::pnn_ntk(2, e1, e2, 2) ==
        doctest::Approx(0.20264236728467555).epsilon(1e-14));
  // profile agrees with the vector form on unit inputs
  CHECK(kernels::pnn_profile(2, 0.6) ==
        doctest::Approx(kernels::pnn_ntk(2, std::vector<double>{0.6, 0.8}.data(), e1, 2))
            .epsilon(1e-13));
}

TEST_CASE("pnn kernel is N-homogeneous per argument") {
  rng::Gaussian g(rng::substream(17, 1));
  for (int N : {2, 3}) {
    for (int rep = 0; rep < 5; ++rep) {
      double x[4], xp[4], cx[4];
      rng::unit_sphere(x, 4, g);
      rng::unit_sphere(xp, 4, g);
      const double c = 0.5 + std::abs(g.next()); // positive: relu kernels are positively homogeneous only
      for (int i = 0; i < 4; ++i) cx[i] = c * x[i];
      CHECK(kernels::pnn_ntk(N, cx, xp, 4) ==
            doctest::Approx(std::pow(c, N) * kernels::pnn_ntk(N, x, xp, 4)).epsilon(1e-10));
    }
  }
}

TEST_CASE("mlp kernel: diagonal, right angle, compact cross-check") {
  CHECK(kernels::mlp_ntk(2, e1, e1, 2) == doctest::Approx(2.0).epsilon(1e-14));
  for (int depth = 2; depth <= 5; ++depth)
    CHECK(kernels::mlp_ntk(depth, e1, e1, 2) == doctest::Approx(double(depth)).epsilon(1e-13));
  CHECK(kernels::mlp_ntk(2, e1, e2, 2) == doctest::Approx(1.0 / kPi).epsilon(1e-14));
  CHECK(kernels::mlp_ntk(3, e1, e2, 2) ==
        doctest::Approx(0.6857086362829425).epsilon(1e-13));

  rng::Gaussian g(rng::substream(18, 1));
  for (int depth = 2; depth <= 5; ++depth)
    for (int rep = 0; rep < 5; ++rep) {
      double x[3], xp[3];
      rng::unit_sphere(x, 3, g);
      rng::unit_sphere(xp, 3, g);
      const double a = kernels::mlp_ntk(depth, x, xp, 3);
      const double b = kernels::mlp_ntk_compact(depth, x, xp, 3);
      CHECK(a == doctest::Approx(b).epsilon(1e-10));
    }
  // 1-homogeneous per argument
  double x[3], xp[3], cx[3];
  rng::unit_sphere(x, 3, g);
  rng::unit_sphere(xp, 3, g);
  for (int i = 0; i < 3; ++i) cx[i] = 2.5 * x[i];
  CHECK(kernels::mlp_ntk(3, cx, xp, 3) ==
        doctest::Approx(2.5 * kernels::mlp_ntk(3, x, xp, 3)).epsilon(1e-12));
}

TEST_CASE("mfn kernel values") {
  CHECK(kernels::mfn_ntk(2, e1, e1, 2) == doctest::Approx(5.422027589276081).epsilon(1e-14));
  CHECK(kernels::mfn_profile(2, 1.0) == doctest::Approx(5.422027589276081).epsilon(1e-14));
  // sin expectation vanishes at right angles, so only the drift term survives
  CHECK(kernels::mfn_ntk(2, e1, e2, 2) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("width-convergence constants") {
  const auto [rho2, bound2] = kernels::theory_init_bound(2, 256, 0.1);
  CHECK(rho2 == doctest::Approx(1469.112066133703).epsilon(1e-10));
  CHECK(bound2 == doctest::Approx(3835.0112624364083).epsilon(1e-10));
  const auto [rho3, bound3] = kernels::theory_init_bound(3, 256, 0.1);
  CHECK(rho3 == doctest::Approx(32986.33589957607).epsilon(1e-10));
  // bound scales as 1/sqrt(m)
  const auto b1 = kernels::theory_init_bound(2, 1000, 0.1).second;
  const auto b4 = kernels::theory_init_bound(2, 4000, 0.1).second;
  CHECK(b4 == doctest::Approx(b1 / 2.0).epsilon(1e-12));

  CHECK(kernels::min_width(2, 0.1) == 3213);
  CHECK(kernels::min_width(3, 0.1) == 1178208);
  CHECK_THROWS_AS(kernels::theory_init_bound(1, 256, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(kernels::theory_init_bound(2, 256, 1.5), std::invalid_argument);
}

TEST_CASE("model dispatch") {
  kernels::KernelModel model{kernels::Family::mlp, 3, 2};
  CHECK(kernels::eval(model, e1, e2) == kernels::mlp_ntk(3, e1, e2, 2));
  model.family = kernels::Family::polynl;
  CHECK_THROWS_AS(kernels::eval(model, e1, e2), std::invalid_argument);
}
