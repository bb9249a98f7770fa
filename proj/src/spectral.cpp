#include "hpntk/spectral.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hpntk::spectral {

namespace {

constexpr double kPi = std::numbers::pi;

// Legendre P_n and derivative at x, for the node solver
void legendre_pair(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

double binom(int n, int r) {
  if (r < 0 || r > n) return 0.0;
  r = std::min(r, n - r);
  double v = 1.0;
  for (int i = 1; i <= r; ++i) v = v * (n - r + i) / i;
  return v;
}

double pochhammer(double a, int j) {
  double v = 1.0;
  for (int i = 0; i < j; ++i) v *= a + i;
  return v;
}

void check_gamma(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive (ambient dim >= 3)");
}

} // namespace

Quadrature gauss_legendre(int nodes) {
  if (nodes < 1) throw std::invalid_argument("nodes must be positive");
  Quadrature q;
  q.t.resize(nodes);
  q.w.resize(nodes);
  const int half = (nodes + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi-style initial guess, then Newton
    double x = std::cos(kPi * (i + 0.75) / (nodes + 0.5));
    double p, dp;
    for (int it = 0; it < 100; ++it) {
      legendre_pair(nodes, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    legendre_pair(nodes, x, p, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.t[i] = -x;
    q.w[i] = w;
    q.t[nodes - 1 - i] = x;
    q.w[nodes - 1 - i] = w;
  }
  if (nodes % 2 == 1) q.t[half - 1] = 0.0;
  return q;
}

Quadrature sphere_rule(int D, int nodes) {
  if (D < 3) throw std::invalid_argument("ambient dimension must be >= 3");
  const double gamma = (D - 2) / 2.0;
  Quadrature gl = gauss_legendre(nodes);
  Quadrature q;
  q.t.resize(nodes);
  q.w.resize(nodes);
  for (int i = 0; i < nodes; ++i) {
    const double phi = (gl.t[i] + 1.0) * (kPi / 2.0);
    q.t[i] = std::cos(phi);
    q.w[i] = gl.w[i] * (kPi / 2.0) * std::pow(std::sin(phi), 2.0 * gamma);
  }
  return q;
}

void gegenbauer_all(int kmax, double gamma, double t, double* out) {
  check_gamma(gamma);
  out[0] = 1.0;
  if (kmax >= 1) out[1] = 2.0 * gamma * t;
  for (int k = 2; k <= kmax; ++k)
    out[k] = (2.0 * (k + gamma - 1.0) * t * out[k - 1] - (k + 2.0 * gamma - 2.0) * out[k - 2]) / k;
}

double gegenbauer_eval(int k, double gamma, double t, bool normalized) {
  if (k < 0) throw std::invalid_argument("degree must be nonnegative");
  std::vector<double> buf(k + 1);
  gegenbauer_all(k, gamma, t, buf.data());
  return normalized ? buf[k] / gegenbauer_at_one(k, gamma) : buf[k];
}

double gegenbauer_at_one(int k, double gamma) {
  check_gamma(gamma);
  // binom(k+2g-1, k) = (2g)_k / k!
  return pochhammer(2.0 * gamma, k) / pochhammer(1.0, k);
}

double fdk(int D, int k) {
  if (k < 0) throw std::invalid_argument("degree must be nonnegative");
  const int d = D - 1;
  if (d < 2) throw std::invalid_argument("ambient dimension must be >= 3");
  if (k == 0) return 1.0;
  return (2.0 * k + d - 1.0) / k * binom(k + d - 2, d - 1);
}

std::vector<double> linearization_coeffs(int p, int q, double v) {
  if (!(v > 0.0)) throw std::invalid_argument("index v must be positive");
  if (p < 0 || q < 0) throw std::invalid_argument("degrees must be nonnegative");
  const int smax = std::min(p, q);
  std::vector<double> lam(smax + 1);
  for (int s = 0; s <= smax; ++s) {
    const int r = p + q - 2 * s;
    lam[s] = (r + v) / (p + q - s + v) * pochhammer(v, s) / pochhammer(1.0, s) *
             pochhammer(v, p - s) / pochhammer(1.0, p - s) * pochhammer(v, q - s) /
             pochhammer(1.0, q - s) * pochhammer(1.0, r) / pochhammer(2.0 * v, r) *
             pochhammer(2.0 * v, p + q - s) / pochhammer(v, p + q - s);
  }
  return lam;
}

GegenbauerSeries kernel_profile_coeffs(const Profile& profile, int D, int kmax, int nodes) {
  if (kmax < 0) throw std::invalid_argument("kmax must be nonnegative");
  if (nodes < 4 * std::max(kmax, 1)) throw std::invalid_argument("need nodes >= 4*kmax");
  const double gamma = (D - 2) / 2.0;
  Quadrature q = sphere_rule(D, nodes);
  std::vector<double> prof(nodes);
  for (int i = 0; i < nodes; ++i) {
    prof[i] = profile(q.t[i]);
    if (!std::isfinite(prof[i])) throw std::invalid_argument("profile not finite on [-1,1]");
  }
  GegenbauerSeries series;
  series.gamma = gamma;
  series.nodes = nodes;
  series.coeffs.assign(kmax + 1, 0.0);
  std::vector<double> num(kmax + 1, 0.0), den(kmax + 1, 0.0), C(kmax + 1);
  for (int i = 0; i < nodes; ++i) {
    gegenbauer_all(kmax, gamma, q.t[i], C.data());
    for (int k = 0; k <= kmax; ++k) {
      num[k] += prof[i] * C[k] * q.w[i];
      den[k] += C[k] * C[k] * q.w[i];
    }
  }
  for (int k = 0; k <= kmax; ++k)
    series.coeffs[k] = num[k] / den[k] * gegenbauer_at_one(k, gamma);
  return series;
}

double series_eval(const GegenbauerSeries& series, double t) {
  const int kmax = static_cast<int>(series.coeffs.size()) - 1;
  std::vector<double> C(kmax + 1);
  gegenbauer_all(kmax, series.gamma, t, C.data());
  double s = 0.0;
  for (int k = 0; k <= kmax; ++k)
    s += series.coeffs[k] * C[k] / gegenbauer_at_one(k, series.gamma);
  return s;
}

SpectralEstimate eigenvalues_from_coeffs(const GegenbauerSeries& series, int D) {
  if ((D - 2) / 2.0 != series.gamma)
    throw std::invalid_argument("ambient dimension does not match the series");
  SpectralEstimate est;
  est.mu.resize(series.coeffs.size());
  for (std::size_t k = 0; k < series.coeffs.size(); ++k)
    est.mu[k] = series.coeffs[k] / fdk(D, static_cast<int>(k));
  return est;
}

double decay_slope(SpectralEstimate& estimate, int k_lo, int k_hi, bool even_only) {
  constexpr double kFloor = 1e-14;
  std::vector<double> lk, lm;
  for (int k = std::max(k_lo, 1); k <= k_hi && k < static_cast<int>(estimate.mu.size()); ++k) {
    if (even_only && k % 2 != 0) continue;
    if (!(estimate.mu[k] > kFloor)) continue;
    lk.push_back(std::log(static_cast<double>(k)));
    lm.push_back(std::log(estimate.mu[k]));
  }
  if (lk.size() < 5) throw std::invalid_argument("need at least 5 retained eigenvalues to fit");
  const double n = static_cast<double>(lk.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lk.size(); ++i) {
    sx += lk[i];
    sy += lm[i];
    sxx += lk[i] * lk[i];
    sxy += lk[i] * lm[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  estimate.fitted_slope = slope;
  estimate.k_lo = k_lo;
  estimate.k_hi = k_hi;
  return slope;
}

double harmonic_target_eval(const HarmonicMixture& mix, const double* x, int D) {
  if (mix.degrees.empty()) return 0.0;
  if (mix.degrees.size() != mix.amplitudes.size() || mix.anchors.rows != mix.degrees.size() ||
      mix.anchors.cols != static_cast<std::size_t>(D))
    throw std::invalid_argument("mixture shape mismatch");
  const double gamma = (D - 2) / 2.0;
  double s = 0.0;
  for (std::size_t j = 0; j < mix.degrees.size(); ++j) {
    double t = 0.0;
    for (int i = 0; i < D; ++i) t += x[i] * mix.anchors(j, i);
    t = std::min(1.0, std::max(-1.0, t));
    s += mix.amplitudes[j] * gegenbauer_eval(mix.degrees[j], gamma, t, true);
  }
  return s / static_cast<double>(mix.degrees.size());
}

std::vector<double> residual_projections(const std::vector<double>& residual,
                                         const Mat& components) {
  if (residual.size() != components.rows) throw std::invalid_argument("length mismatch");
  const std::size_t n = components.rows, kc = components.cols;
  std::vector<double> proj(kc, 0.0), norm2(kc, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < kc; ++j) {
      proj[j] += residual[i] * components(i, j);
      norm2[j] += components(i, j) * components(i, j);
    }
  }
  const double rootn = std::sqrt(static_cast<double>(n));
  for (std::size_t j = 0; j < kc; ++j)
    proj[j] = std::fabs(proj[j]) / (rootn * std::sqrt(norm2[j]));
  return proj;
}

} // namespace hpntk::spectral
