#pragma once
#include <cstdint>
#include <vector>

#include "hpntk/nets.h"
#include "hpntk/regress.h"

// Full-batch gradient descent on 0.5 sum_i (f(x_i) - y_i)^2 for the product
// nets, recording the quantities the kernel-regime stability statements bound:
// the loss ||e||_2, parameter step norms, and the Frobenius drift of the
// empirical tangent Gram from its value at init. W_out stays frozen; the
// gradient steps touch the leading trainable block of theta only.
namespace hpntk::gd {

struct TrainConfig {
  double learning_rate = 0.0;
  int steps = 0;
  int record_ntk_every = 10;  // rows land at this cadence plus step 0 and the final step
};

struct TrainTrace {
  std::vector<int> step;
  std::vector<double> loss;           // ||e(theta_t)||_2
  std::vector<double> step_norm;      // ||theta_t - theta_{t-1}||_2 (0 at t = 0)
  std::vector<double> cum_step_norm;  // running sum of step norms up to t
  std::vector<double> ntk_drift;      // ||K^_t - K^_0||_F
  nets::NetParams final_params;
  double r0 = 0.0;  // initial loss
};

// throws on non-finite loss with the step index in the message
TrainTrace gd_train(const nets::NetParams& params0, const regress::Dataset& data,
                    const TrainConfig& config);

// 2 / (lambda_min + lambda_max) of the analytic Gram
double max_safe_lr(const Mat& gram);

struct StabilityReport {
  double lambda_min = 0.0, lambda_max = 0.0, eta0 = 0.0, r0 = 0.0;
  std::vector<double> envelope;  // (1 - eta0 lambda_min / 3)^t r0 at recorded steps
  std::vector<double> margin;    // envelope - loss (negative = violation)
  bool envelope_ok = true;
  int first_violation_step = -1;
  double sup_drift = 0.0;            // sup_t ||K^_t - K^_0||_F
  double final_cum_step_norm = 0.0;  // cumulative parameter drift
};

StabilityReport stability_report(const TrainTrace& trace, const Mat& analytic_gram, double eta0);

} // namespace hpntk::gd
