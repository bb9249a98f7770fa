#include "hpntk/kernels.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hpntk/simd.h"

namespace hpntk::kernels {

namespace {

constexpr double kPi = 3.14159265358979323846;

// collinear inputs give dot/(|x||xp|) = +-1 only up to rounding, and the acos
// cliff (derivative ~1/sin) amplifies that ulp-level error to ~1e-8; snapping
// inside the rounding budget keeps rays exactly homogeneous and costs less
// accuracy than the noise it removes
double clamp_cos(double c) {
  if (c >= 1.0 - 4e-15) return 1.0;
  if (c <= -1.0 + 4e-15) return -1.0;
  return c;
}

struct Pair {
  double dot, nx, nxp;
  double cosang() const { return clamp_cos(dot / (nx * nxp)); }
};

Pair load_pair(const double* x, const double* xp, std::size_t d) {
  Pair p;
  p.dot = simd::dot(x, xp, d);
  p.nx = std::sqrt(simd::dot(x, x, d));
  p.nxp = std::sqrt(simd::dot(xp, xp, d));
  if (p.nx == 0.0 || p.nxp == 0.0) throw std::domain_error("zero-norm input");
  return p;
}

// arc-cosine forms on precomputed geometry
double k1_of(double theta) { return (kPi - theta) / kPi; }
double k2_of(double theta, double nx, double nxp) {
  return nx * nxp * (std::sin(theta) + (kPi - theta) * std::cos(theta)) / kPi;
}

double dist2(const double* x, const double* xp, std::size_t d, double sgn) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = x[i] - sgn * xp[i];
    s += diff * diff;
  }
  return s;
}

} // namespace

double kappa1(const double* x, const double* xp, std::size_t d) {
  const Pair p = load_pair(x, xp, d);
  return k1_of(std::acos(p.cosang()));
}

double kappa2(const double* x, const double* xp, std::size_t d) {
  const Pair p = load_pair(x, xp, d);
  return k2_of(std::acos(p.cosang()), p.nx, p.nxp);
}

double kappa3(const double* x, const double* xp, std::size_t d) {
  return std::exp(-0.5 * dist2(x, xp, d, 1.0)) + std::exp(-0.5 * dist2(x, xp, d, -1.0));
}

double kappa4(const double* x, const double* xp, std::size_t d) {
  return std::exp(-0.5 * dist2(x, xp, d, 1.0)) - std::exp(-0.5 * dist2(x, xp, d, -1.0));
}

double pnn_ntk(int N, const double* x, const double* xp, std::size_t d) {
  const Pair p = load_pair(x, xp, d);
  const double theta = std::acos(p.cosang());
  const double k1 = k1_of(theta);
  const double k2 = k2_of(theta, p.nx, p.nxp);
  return 2.0 * N * p.dot * k1 * std::pow(k2, N - 1) + 2.0 * std::pow(k2, N);
}

double mlp_ntk(int depth, const double* x, const double* xp, std::size_t d) {
  const Pair p = load_pair(x, xp, d);
  // covariance triple (sig_xx, sig, sig_pp); diagonals are preserved by the
  // factor-2 arc-cosine map, so only sig updates layer to layer
  const double sig_xx = p.nx * p.nx, sig_pp = p.nxp * p.nxp;
  double sig = p.dot;
  double K = sig;
  for (int i = 1; i < depth; ++i) {
    const double denom = std::sqrt(sig_xx * sig_pp);
    const double theta = std::acos(clamp_cos(sig / denom));
    const double sig_next = denom * (std::sin(theta) + (kPi - theta) * std::cos(theta)) / kPi;
    const double sigdot = (kPi - theta) / (2.0 * kPi);
    K = sig_next + 2.0 * K * sigdot;
    sig = sig_next;
  }
  return K;
}

double mlp_ntk_compact(int depth, const double* x, const double* xp, std::size_t d) {
  const Pair p = load_pair(x, xp, d);
  const double scale = p.nx * p.nxp;
  // G^(1) = <x,xp>; G^(n) and Gdot^(n) from the angle of G^(n-1)
  std::vector<double> G(depth + 1, 0.0), Gdot(depth + 1, 0.0);
  G[1] = p.dot;
  for (int n = 2; n <= depth; ++n) {
    const double theta = std::acos(clamp_cos(G[n - 1] / scale));
    G[n] = scale * (std::sin(theta) + (kPi - theta) * std::cos(theta)) / kPi;
    Gdot[n] = (kPi - theta) / kPi;
  }
  double K = G[depth];
  for (int n = 1; n < depth; ++n) {
    double term = G[n];
    for (int l = n + 1; l <= depth; ++l) term *= Gdot[l];
    K += term;
  }
  return K;
}

double mfn_ntk(int N, const double* x, const double* xp, std::size_t d) {
  const double k3 = kappa3(x, xp, d);
  const double k4 = kappa4(x, xp, d);
  double dot = simd::dot(x, xp, d);
  return 2.0 * N * dot * k3 * std::pow(k4, N - 1) + 2.0 * std::pow(k4, N);
}

double pnn_profile(int N, double t) {
  t = clamp_cos(t);
  const double theta = std::acos(t);
  const double k1 = k1_of(theta);
  const double k2 = k2_of(theta, 1.0, 1.0);
  return 2.0 * N * t * k1 * std::pow(k2, N - 1) + 2.0 * std::pow(k2, N);
}

double mlp_profile(int depth, double t) {
  t = clamp_cos(t);
  double sig = t;
  double K = sig;
  for (int i = 1; i < depth; ++i) {
    const double theta = std::acos(clamp_cos(sig));
    const double sig_next = (std::sin(theta) + (kPi - theta) * std::cos(theta)) / kPi;
    const double sigdot = (kPi - theta) / (2.0 * kPi);
    K = sig_next + 2.0 * K * sigdot;
    sig = sig_next;
  }
  return K;
}

double mfn_profile(int N, double t) {
  t = clamp_cos(t);
  const double k3 = std::exp(-(1.0 - t)) + std::exp(-(1.0 + t));
  const double k4 = std::exp(-(1.0 - t)) - std::exp(-(1.0 + t));
  return 2.0 * N * t * k3 * std::pow(k4, N - 1) + 2.0 * std::pow(k4, N);
}

double eval(const KernelModel& model, const double* x, const double* xp) {
  const std::size_t d = static_cast<std::size_t>(model.input_dim);
  switch (model.family) {
    case Family::pnn: return pnn_ntk(model.n, x, xp, d);
    case Family::mlp: return mlp_ntk(model.n, x, xp, d);
    case Family::mfn: return mfn_ntk(model.n, x, xp, d);
    case Family::polynl: throw std::invalid_argument("polynl has no closed form; use mc::polynl_ntk_mc");
  }
  throw std::invalid_argument("unknown family");
}

std::pair<double, double> theory_init_bound(int N, std::int64_t m, double delta) {
  if (N < 2) throw std::invalid_argument("N must be >= 2");
  if (m < 1) throw std::invalid_argument("width must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0,1)");
  const double e = std::exp(1.0);
  const double two_nm1 = 2.0 * N - 1.0;
  const double rho = std::sqrt(std::pow(2.0, two_nm1)) * std::sqrt(8.0) * std::exp(3.0) *
                     std::pow(2.0 * kPi, 0.25) * std::exp(1.0 / 24.0) *
                     std::pow(std::exp(2.0 / e) * two_nm1 / 2.0, two_nm1 / 2.0);
  const double bound =
      4.0 * N * rho * e * std::sqrt(std::log(2.0 * N / delta) / static_cast<double>(m));
  return {rho, bound};
}

std::int64_t min_width(int N, double delta) {
  if (N < 2) throw std::invalid_argument("N must be >= 2");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0,1)");
  const double v = std::pow(2.0, 4.0 * N - 2.0) *
                   std::pow(std::log(2.0 * N / delta), 2.0 * N - 1.0);
  return static_cast<std::int64_t>(std::ceil(v));
}

} // namespace hpntk::kernels
