#pragma once
#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "hpntk/nets.h"

// Monte Carlo oracles for the Gaussian expectations behind the closed-form
// kernels, plus the sampling-only attention-block kernel. Sampling is split
// into fixed-size chunks with substreams keyed by (seed, chunk index), so an
// estimate is bit-identical for a fixed seed no matter how the chunks are
// scheduled.
namespace hpntk::mc {

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

// arc-type expectations, same factor-2 convention as the closed forms:
// k1 = 2 E[step(w.x) step(w.xp)]   k2 = 2 E[relu(w.x) relu(w.xp)]
// k3 = 2 E[cos(w.x) cos(w.xp)]     k4 = 2 E[sin(w.x) sin(w.xp)]
enum class Kappa { k1, k2, k3, k4 };

// `samples` counts weight draws; each draw is evaluated at +-w (antithetic)
// and contributes one pair-averaged sample to the mean and the std error.
McEstimate kappa_oracle(Kappa which, const double* x, const double* xp, std::size_t d,
                        std::size_t samples, std::uint64_t seed);

// all four kappas from one shared weight stream
std::array<McEstimate, 4> kappa_oracle_all(const double* x, const double* xp, std::size_t d,
                                           std::size_t samples, std::uint64_t seed);

// many pairs against the same weight stream: X and Xp hold one pair per row
std::vector<std::array<McEstimate, 4>> kappa_oracle_batch(const Mat& X, const Mat& Xp,
                                                          std::size_t samples,
                                                          std::uint64_t seed);

// Kernel of the attention block over its trainable gates: conditioned on the
// width-m first layer from `spec`, draws scalar gate pairs (w3, w4) and
// averages 4 * s(x) s(xp) with s = <tau, y2*u> - <tau, y2><tau, u>,
// u = y2*y2, tau = softmax(w3 w4 u).
McEstimate polynl_ntk_mc(const nets::PolyNLSpec& spec, const double* x, const double* xp,
                         std::size_t samples, std::uint64_t seed);

} // namespace hpntk::mc
