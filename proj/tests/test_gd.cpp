#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include "hpntk/gd.h"
#include "hpntk/kernels.h"
#include "hpntk/nets.h"
#include "hpntk/regress.h"
#include "hpntk/rng.h"

using namespace hpntk;
using kernels::Family;

namespace {

regress::Dataset small_data(int n, int d, std::uint64_t seed) {
  regress::Dataset data;
  data.X = Mat(n, d);
  data.y.resize(n);
  rng::Gaussian g(rng::substream(seed, 1));
  for (int i = 0; i < n; ++i) {
    rng::unit_sphere(data.X.row(i), d, g);
    data.y[i] = g.next();
  }
  return data;
}

} // namespace

TEST_CASE("zero learning rate freezes the parameters") {
  const auto p0 = nets::init_params({Family::pnn, 2, 32, 3, 61});
  const auto data = small_data(4, 3, 61);
  const auto trace = gd::gd_train(p0, data, {0.0, 20, 10});
  CHECK(trace.final_params.W[0].a == p0.W[0].a);
  for (double l : trace.loss) CHECK(l == trace.loss[0]);
  for (double s : trace.step_norm) CHECK(s == 0.0);
  for (double d2 : trace.ntk_drift) CHECK(d2 == 0.0);
}

TEST_CASE("zero steps yields the initial record only") {
  const auto p0 = nets::init_params({Family::pnn, 2, 16, 3, 62});
  const auto data = small_data(3, 3, 62);
  const auto trace = gd::gd_train(p0, data, {0.1, 0, 10});
  REQUIRE(trace.step.size() == 1);
  CHECK(trace.step[0] == 0);
  CHECK(trace.loss[0] == trace.r0);
}

TEST_CASE("records land on the cadence plus the final step") {
  const auto p0 = nets::init_params({Family::pnn, 2, 16, 3, 63});
  const auto data = small_data(3, 3, 63);
  const auto trace = gd::gd_train(p0, data, {1e-3, 25, 10});
  const std::vector<int> expect = {0, 10, 20, 25};
  CHECK(trace.step == expect);
  // cumulative drift is monotone
  for (std::size_t i = 1; i < trace.cum_step_norm.size(); ++i)
    CHECK(trace.cum_step_norm[i] >= trace.cum_step_norm[i - 1]);
}

TEST_CASE("max safe learning rate from the spectrum") {
  Mat K(2, 2);
  K(0, 0) = 3.0;
  K(1, 1) = 1.0;
  CHECK(gd::max_safe_lr(K) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("wide training tracks the kernel envelope") {
  const int n = 4, d = 3, N = 2;
  const auto data = small_data(n, d, 64);
  const kernels::KernelModel model{Family::pnn, N, d};
  const auto gram = regress::assemble_gram(model, data.X);
  const double eta0 = 0.5 * gd::max_safe_lr(gram.entries);

  const auto p0 = nets::init_params({Family::pnn, N, 1024, d, 64});
  const auto trace = gd::gd_train(p0, data, {eta0, 120, 10});
  const auto rep = gd::stability_report(trace, gram.entries, eta0);
  CHECK(rep.r0 == trace.r0);
  CHECK(rep.envelope.size() == trace.step.size());
  CHECK(rep.envelope_ok);
  CHECK(rep.first_violation_step == -1);
  // loss actually decreased
  CHECK(trace.loss.back() < 0.5 * trace.loss.front());
}

TEST_CASE("divergent training aborts with a step index") {
  const auto p0 = nets::init_params({Family::pnn, 3, 16, 3, 65});
  const auto data = small_data(4, 3, 65);
  CHECK_THROWS_AS(gd::gd_train(p0, data, {1e6, 200, 10}), std::runtime_error);
}

TEST_CASE("output layer stays frozen during training") {
  const auto p0 = nets::init_params({Family::pnn, 2, 32, 3, 66});
  const auto data = small_data(4, 3, 66);
  const auto trace = gd::gd_train(p0, data, {1e-2, 30, 10});
  CHECK(trace.final_params.w_out == p0.w_out);
  CHECK(trace.final_params.W[0].a != p0.W[0].a);
}
