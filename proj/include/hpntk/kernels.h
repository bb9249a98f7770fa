#pragma once
#include <cstddef>
#include <cstdint>
#include <utility>

// Closed-form infinite-width tangent kernels. Convention: the Gaussian
// expectations are taken with w ~ N(0, I) and carry an explicit factor 2, so
// kappa1(x,x) = 1, kappa2(x,x) = ||x||^2, and the product-net kernel equals
// 2N + 2 on unit diagonal. Everything here is width-free.
namespace hpntk::kernels {

enum class Family { pnn, mlp, mfn, polynl };

struct KernelModel {
  Family family = Family::pnn;
  int n = 2;           // Hadamard order for pnn/mfn, layer count for mlp
  int input_dim = 1;
  // Monte Carlo settings for the family without a closed form (polynl)
  std::int64_t mc_samples = 0;
  std::uint64_t mc_seed = 0;
  int mc_width = 0;
};

// 2 E[relu'(w.x) relu'(w.xp)] = (pi - theta)/pi
double kappa1(const double* x, const double* xp, std::size_t d);
// 2 E[relu(w.x) relu(w.xp)] = ||x|| ||xp|| (sin theta + (pi - theta) cos theta)/pi
double kappa2(const double* x, const double* xp, std::size_t d);
// 2 E[cos(w.x) cos(w.xp)] = exp(-||x-xp||^2/2) + exp(-||x+xp||^2/2)
double kappa3(const double* x, const double* xp, std::size_t d);
// 2 E[sin(w.x) sin(w.xp)] = exp(-||x-xp||^2/2) - exp(-||x+xp||^2/2)
double kappa4(const double* x, const double* xp, std::size_t d);

// 2N <x,xp> kappa1 kappa2^{N-1} + 2 kappa2^N; N-homogeneous per argument
double pnn_ntk(int N, const double* x, const double* xp, std::size_t d);
// layer recursion K_0 = <x,xp>, K_i = Sigma_i + 2 K_{i-1} Sigmadot_i; returns
// K_{depth-1}; 1-homogeneous per argument
double mlp_ntk(int depth, const double* x, const double* xp, std::size_t d);
// independent evaluation through the sum-of-products form
// K^(N) = G^(N) + sum_n G^(n) prod_{l>n} Gdot^(l); cross-checks mlp_ntk
double mlp_ntk_compact(int depth, const double* x, const double* xp, std::size_t d);
// 2N <x,xp> kappa3 kappa4^{N-1} + 2 kappa4^N
double mfn_ntk(int N, const double* x, const double* xp, std::size_t d);

// Unit-sphere profiles kappa(t) with t = <x,xp>, for the Mercer machinery.
double pnn_profile(int N, double t);
double mlp_profile(int depth, double t);
double mfn_profile(int N, double t);

// Closed-form families only; polynl goes through mc::polynl_ntk_mc.
double eval(const KernelModel& model, const double* x, const double* xp);

// Width-convergence bound: rho(N) and the deviation bound 4 N rho e
// sqrt(log(2N/delta)/m). Natural logarithm throughout.
std::pair<double, double> theory_init_bound(int N, std::int64_t m, double delta);
// smallest integer width >= 2^{4N-2} log^{2N-1}(2N/delta)
std::int64_t min_width(int N, double delta);

} // namespace hpntk::kernels
