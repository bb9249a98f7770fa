#pragma once
#include <string>
#include <vector>

#include "hpntk/kernels.h"
#include "hpntk/mat.h"

// Gram assembly and min-norm kernel regression f(x) = k(x)^T K^{-1} y. The
// inverse is a numerical device: the solve starts at the requested jitter
// (default 0) and escalates by decades up to 1e-6 trace/n before failing.
namespace hpntk::regress {

struct Dataset {
  Mat X;
  std::vector<double> y;
};

// CSV with header x1..xd,y; throws on wrong arity, bad header, or no rows
Dataset read_dataset_csv(const std::string& path);

struct GramMatrix {
  Mat entries;
  double jitter_applied = 0.0;
};

// one kernel entry; closed form for pnn/mlp/mfn, Monte Carlo (model.mc_*)
// for polynl
double kernel_value(const kernels::KernelModel& model, const double* x, const double* xp);

// K_ij = K(x_i, x_j), upper triangle mirrored; duplicate rows are rejected
// (the minimum eigenvalue would vanish)
GramMatrix assemble_gram(const kernels::KernelModel& model, const Mat& X);

struct RegressionModel {
  Dataset data;
  kernels::KernelModel kernel;
  std::vector<double> alpha;  // (K + jitter I) alpha = y
  double jitter = 0.0;
  double residual_inf = 0.0;  // ||(K + jitter I) alpha - y||_inf after refinement
};

// Cholesky solve with the jitter ladder plus one iterative-refinement round;
// enforces residual_inf <= 1e-8 ||y||_inf
RegressionModel fit(const kernels::KernelModel& model, const Dataset& data, double jitter = 0.0);

double predict(const RegressionModel& model, const double* x);

// extreme eigenvalues of the raw (un-jittered) Gram
std::pair<double, double> spectrum_bounds(const Mat& gram);

} // namespace hpntk::regress
