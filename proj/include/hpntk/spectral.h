#pragma once
#include <cstddef>
#include <functional>
#include <vector>

#include "hpntk/mat.h"

// Gegenbauer machinery for dot-product kernels on the unit sphere S^{D-1}:
// quadrature-based Mercer coefficients, harmonic multiplicities, eigenvalue
// decay fitting, product linearization, and the harmonic mixture targets used
// by the frequency-learning experiment. Convention: ambient dimension D >= 3,
// gamma = (D-2)/2, multiplicities F(d,k) with d = D-1.
namespace hpntk::spectral {

// Gauss-Legendre nodes/weights on [-1,1]
struct Quadrature {
  std::vector<double> t, w;
};
Quadrature gauss_legendre(int nodes);

// substituted rule for integrals against (1-t^2)^{gamma-1/2} dt: nodes
// t_i = cos(phi_i) with the sin(phi)^{2 gamma} weight folded into w_i
Quadrature sphere_rule(int D, int nodes);

// three-term recurrence C_0 = 1, C_1 = 2 gamma t,
// k C_k = 2(k+gamma-1) t C_{k-1} - (k+2 gamma-2) C_{k-2}
double gegenbauer_eval(int k, double gamma, double t, bool normalized = false);
// C_0..C_kmax at one point, into out[0..kmax]
void gegenbauer_all(int kmax, double gamma, double t, double* out);
// C_k(1) = binom(k+2 gamma-1, k)
double gegenbauer_at_one(int k, double gamma);

// count of degree-k spherical harmonics on S^{D-1}; F := 1 at k = 0
double fdk(int D, int k);

// product formula C_p C_q = sum_s lambda_s C_{p+q-2s}, s = 0..min(p,q)
std::vector<double> linearization_coeffs(int p, int q, double v);

struct GegenbauerSeries {
  double gamma = 0.5;
  std::vector<double> coeffs;  // profile(t) = sum_k coeffs[k] * C_k(t)/C_k(1)
  int nodes = 0;               // quadrature size the coefficients came from
};

using Profile = std::function<double(double)>;

// coefficients of the profile in the normalized basis G_k = C_k / C_k(1)
GegenbauerSeries kernel_profile_coeffs(const Profile& profile, int D, int kmax, int nodes);

// sum_k coeffs[k] G_k(t)
double series_eval(const GegenbauerSeries& series, double t);

struct SpectralEstimate {
  std::vector<double> mu;  // mu_k = coeffs[k] / F(D-1, k)
  double fitted_slope = 0.0;
  int k_lo = 0, k_hi = 0;
};

SpectralEstimate eigenvalues_from_coeffs(const GegenbauerSeries& series, int D);

// least-squares slope of log mu_k vs log k over k in [k_lo, k_hi], keeping
// mu_k > 1e-14 (and even k only when even_only); needs >= 5 retained points.
// Records the fit into the estimate and returns the slope.
double decay_slope(SpectralEstimate& estimate, int k_lo, int k_hi, bool even_only);

// target (1/|K|) sum_k A_k G_k(<x, anchor_k>) on S^{D-1}
struct HarmonicMixture {
  std::vector<int> degrees;
  std::vector<double> amplitudes;
  Mat anchors;  // one unit row per degree
};

double harmonic_target_eval(const HarmonicMixture& mix, const double* x, int D);

// per column j: |<residual, col_j>| / (sqrt(n) ||col_j||_2)
std::vector<double> residual_projections(const std::vector<double>& residual,
                                         const Mat& components);

} // namespace hpntk::spectral
