#include <doctest.h>

#include <cmath>
#include <vector>

#include "hpntk/rng.h"

using namespace hpntk;

TEST_CASE("substreams are reproducible and key-separated") {
  auto a = rng::substream(42, 7);
  auto b = rng::substream(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());

  auto c = rng::substream(42, 8);
  auto d = rng::substream(43, 7);
  int equal_c = 0, equal_d = 0;
  auto e = rng::substream(42, 7);
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t v = e.next();
    if (v == c.next()) ++equal_c;
    if (v == d.next()) ++equal_d;
  }
  CHECK(equal_c == 0);
  CHECK(equal_d == 0);
}

TEST_CASE("uniform01 stays in [0,1)") {
  auto g = rng::substream(1, 1);
  for (int i = 0; i < 10000; ++i) {
    const double u = g.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("gaussian moments") {
  const std::size_t n = 200000;
  std::vector<double> v(n);
  rng::fill_gaussian(v.data(), n, 5, 0);
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double var = 0.0, skew = 0.0;
  for (double x : v) {
    var += (x - mean) * (x - mean);
    skew += (x - mean) * (x - mean) * (x - mean);
  }
  var /= n - 1;
  skew /= n;
  CHECK(std::fabs(mean) < 0.01);
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::fabs(skew) < 0.03);
}

TEST_CASE("chunked fill is schedule-independent") {
  const std::size_t n = 1000, chunk = 128;
  std::vector<double> whole(n), pieces(n);
  rng::fill_gaussian_chunked(whole.data(), n, 9, 3, chunk);
  // same entries assembled chunk by chunk
  for (std::size_t c = 0; c * chunk < n; ++c) {
    const std::size_t lo = c * chunk, hi = std::min(lo + chunk, n);
    std::vector<double> piece(hi - lo);
    rng::Gaussian g(rng::substream(9, 3, c));
    for (std::size_t i = 0; i < piece.size(); ++i) piece[i] = g.next();
    for (std::size_t i = lo; i < hi; ++i) pieces[i] = piece[i - lo];
  }
  for (std::size_t i = 0; i < n; ++i) CHECK(whole[i] == pieces[i]);
}

TEST_CASE("unit sphere draws have unit norm") {
  rng::Gaussian g(rng::substream(3, 3));
  for (int rep = 0; rep < 50; ++rep) {
    double x[7];
    rng::unit_sphere(x, 7, g);
    double n2 = 0.0;
    for (double xi : x) n2 += xi * xi;
    CHECK(std::sqrt(n2) == doctest::Approx(1.0).epsilon(1e-12));
  }
}
