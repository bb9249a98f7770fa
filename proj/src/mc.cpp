#include "hpntk/mc.h"

#include <cmath>
#include <stdexcept>

#include "hpntk/rng.h"
#include "hpntk/simd.h"

namespace hpntk::mc {

namespace {

constexpr std::size_t kChunkDraws = 8192;
constexpr std::uint64_t kKeyKappa = 0;
constexpr std::uint64_t kKeyGates = 0x20000;

// running mean / sum of squared deviations (Welford)
struct Acc {
  double mean = 0.0, m2 = 0.0;
  std::size_t n = 0;
  void add(double v) {
    ++n;
    const double delta = v - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (v - mean);
  }
  McEstimate estimate() const {
    McEstimate e;
    e.value = mean;
    e.samples = n;
    if (n > 1) e.std_error = std::sqrt(m2 / (static_cast<double>(n) * (n - 1)));
    return e;
  }
};

inline double relu(double v) { return v > 0.0 ? v : 0.0; }

// One antithetic sample of all four kappas from the projections u = w.x,
// v = w.xp. step/relu averages pair +-w; the trig products are even in w, so
// both members coincide and the pair average equals the single evaluation.
inline void kappa_samples(double u, double v, double out[4]) {
  out[0] = (u > 0.0 && v > 0.0 ? 1.0 : 0.0) + (u < 0.0 && v < 0.0 ? 1.0 : 0.0);
  out[1] = relu(u) * relu(v) + relu(-u) * relu(-v);
  out[2] = 2.0 * std::cos(u) * std::cos(v);
  out[3] = 2.0 * std::sin(u) * std::sin(v);
}

} // namespace

std::vector<std::array<McEstimate, 4>> kappa_oracle_batch(const Mat& X, const Mat& Xp,
                                                          std::size_t samples,
                                                          std::uint64_t seed) {
  if (samples == 0) throw std::invalid_argument("samples must be positive");
  if (X.rows != Xp.rows || X.cols != Xp.cols) throw std::invalid_argument("pair shape mismatch");
  const std::size_t npairs = X.rows, d = X.cols;
  std::vector<std::array<Acc, 4>> acc(npairs);
  std::vector<double> w(d);
  double s[4];
  std::size_t done = 0, chunk = 0;
  while (done < samples) {
    const std::size_t take = std::min(kChunkDraws, samples - done);
    rng::Gaussian g(rng::substream(seed, kKeyKappa, chunk));
    for (std::size_t t = 0; t < take; ++t) {
      for (std::size_t j = 0; j < d; ++j) w[j] = g.next();
      for (std::size_t p = 0; p < npairs; ++p) {
        const double u = simd::dot(w.data(), X.row(p), d);
        const double v = simd::dot(w.data(), Xp.row(p), d);
        kappa_samples(u, v, s);
        for (int q = 0; q < 4; ++q) acc[p][q].add(s[q]);
      }
    }
    done += take;
    ++chunk;
  }
  std::vector<std::array<McEstimate, 4>> out(npairs);
  for (std::size_t p = 0; p < npairs; ++p)
    for (int q = 0; q < 4; ++q) out[p][q] = acc[p][q].estimate();
  return out;
}

std::array<McEstimate, 4> kappa_oracle_all(const double* x, const double* xp, std::size_t d,
                                           std::size_t samples, std::uint64_t seed) {
  Mat X(1, d), Xp(1, d);
  std::copy(x, x + d, X.row(0));
  std::copy(xp, xp + d, Xp.row(0));
  return kappa_oracle_batch(X, Xp, samples, seed)[0];
}

McEstimate kappa_oracle(Kappa which, const double* x, const double* xp, std::size_t d,
                        std::size_t samples, std::uint64_t seed) {
  return kappa_oracle_all(x, xp, d, samples, seed)[static_cast<int>(which)];
}

McEstimate polynl_ntk_mc(const nets::PolyNLSpec& spec, const double* x, const double* xp,
                         std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw std::invalid_argument("samples must be positive");
  const nets::NetParams p = nets::polynl_init(spec);
  const std::size_t m = static_cast<std::size_t>(spec.m);

  // per input: y2 = relu(W1 x), u = y2*y2
  auto features = [&](const double* in, std::vector<double>& y2, std::vector<double>& u) {
    std::vector<double> a(m, 0.0);
    for (int j = 0; j < spec.d; ++j) simd::axpy(in[j], p.W[0].row(j), a.data(), m);
    y2.resize(m);
    simd::relu(a.data(), y2.data(), m);
    u.resize(m);
    simd::mul(y2.data(), y2.data(), u.data(), m);
  };
  std::vector<double> y2a, ua, y2b, ub;
  features(x, y2a, ua);
  features(xp, y2b, ub);
  std::vector<double> y2u_a(m), y2u_b(m);
  simd::mul(y2a.data(), ua.data(), y2u_a.data(), m);
  simd::mul(y2b.data(), ub.data(), y2u_b.data(), m);

  // s = <tau, y2*u> - <tau,y2><tau,u> for tau = softmax(gate * u)
  std::vector<double> tau(m);
  auto softmax_stat = [&](double gate, const std::vector<double>& u_, const std::vector<double>& y2_,
                          const std::vector<double>& y2u_) {
    double mx = gate * u_[0];
    for (std::size_t i = 1; i < m; ++i) mx = std::max(mx, gate * u_[i]);
    double denom = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      tau[i] = std::exp(gate * u_[i] - mx);
      denom += tau[i];
    }
    simd::scale(1.0 / denom, tau.data(), m);
    return simd::dot(tau.data(), y2u_.data(), m) -
           simd::dot(tau.data(), y2_.data(), m) * simd::dot(tau.data(), u_.data(), m);
  };

  Acc acc;
  std::size_t done = 0, chunk = 0;
  while (done < samples) {
    const std::size_t take = std::min(kChunkDraws, samples - done);
    rng::Gaussian g(rng::substream(seed, kKeyGates, chunk));
    for (std::size_t t = 0; t < take; ++t) {
      const double w3 = g.next(), w4 = g.next();
      const double gate = w3 * w4;
      const double sa = softmax_stat(gate, ua, y2a, y2u_a);
      const double sb = softmax_stat(gate, ub, y2b, y2u_b);
      acc.add(4.0 * sa * sb);
    }
    done += take;
    ++chunk;
  }
  return acc.estimate();
}

} // namespace hpntk::mc
