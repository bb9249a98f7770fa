#pragma once
#include <cstddef>
#include <cstdint>
#include <vector>

#include "hpntk/kernels.h"
#include "hpntk/mat.h"

// Finite-width nets and their exact Jacobians. The product families use
// f(x) = sqrt(2^{N+1}/m) w_out . (relu(W_1 x) * ... * relu(W_N x))
// (sin instead of relu for the sinusoidal family): one output-side scale
// rather than a per-layer one. By positive homogeneity this evaluates the
// same architecture, normalizes E f^2 = 2 on the unit sphere, and makes
// J J^T converge to the analytic kernel without any width rescaling.
namespace hpntk::nets {

struct ArchSpec {
  kernels::Family family = kernels::Family::pnn;
  int n = 2;       // product order (pnn/mfn) or layer count (mlp)
  int m = 64;      // width
  int d = 2;       // input dimension
  std::uint64_t seed = 0;
};

struct NetParams {
  ArchSpec spec;
  // N weight matrices, logically m x d but stored transposed (d x m) so the
  // width-m direction is contiguous; draws and flatten order stay row-major.
  std::vector<Mat> W;
  std::vector<double> w_out;  // m
  // polynl extras
  std::vector<double> w_q, w_k;
  double w_v = 1.0;

  // full parameter count theta = (W_1..W_N, w_out)
  std::size_t theta_size() const {
    return W.size() * static_cast<std::size_t>(spec.m) * spec.d + w_out.size();
  }
  // leading block of theta that optimizers update (w_out stays frozen)
  std::size_t trainable_size() const { return W.size() * static_cast<std::size_t>(spec.m) * spec.d; }
};

struct PolyNLSpec {
  int m = 64;
  int d = 2;
  std::uint64_t seed = 0;
};

// every entry an independent standard normal draw, reproducible from seed
NetParams init_params(const ArchSpec& spec);
NetParams polynl_init(const PolyNLSpec& spec);

double pnn_forward(const NetParams& p, const double* x);
double mfn_forward(const NetParams& p, const double* x);
double polynl_forward(const NetParams& p, const double* x);
double forward(const NetParams& p, const double* x);

// Per-layer gradient factors at x: row n of U (N x m) satisfies
// d f / d W_n = outer(U_n, x); wout_block is d f / d w_out. Product families
// only; relu'(0) := 0.
void gradient_factors(const NetParams& p, const double* x, Mat& U,
                      std::vector<double>& wout_block);

// Exact gradient of f with respect to the full flattened theta, order W_1
// row-major, then W_2, ..., W_N, then w_out. The w_out block participates in
// the kernel and the Euler identity; optimizers simply never step it.
// relu'(0) := 0.
void jacobian(const NetParams& p, const double* x, double* out);

// K^ = J J^T over the rows of X
Mat empirical_ntk(const NetParams& p, const Mat& X);

// analytic vs central-difference gradient: max_i |dJ_i| / (|J_i| + floor)
double finite_diff_check(const NetParams& p, const double* x, double eps);

// flatten/unflatten of the full theta (round-trips exactly; product families only)
void flatten(const NetParams& p, double* theta);
void unflatten(NetParams& p, const double* theta);

} // namespace hpntk::nets
