#include "hpntk/gd.h"

#include <cmath>
#include <stdexcept>

#include "hpntk/simd.h"

namespace hpntk::gd {

namespace {

double frob_diff(const Mat& a, const Mat& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.a.size(); ++i) {
    const double d = a.a[i] - b.a[i];
    s += d * d;
  }
  return std::sqrt(s);
}

} // namespace

TrainTrace gd_train(const nets::NetParams& params0, const regress::Dataset& data,
                    const TrainConfig& config) {
  if (config.learning_rate < 0.0) throw std::invalid_argument("learning rate must be >= 0");
  if (config.steps < 0) throw std::invalid_argument("steps must be >= 0");
  if (config.record_ntk_every < 1) throw std::invalid_argument("record cadence must be >= 1");
  const std::size_t n = data.X.rows;
  if (data.y.size() != n) throw std::invalid_argument("label count mismatch");

  nets::NetParams p = params0;
  const std::size_t P = p.theta_size(), Pt = p.trainable_size();
  std::vector<double> theta(P), grad(P), jac(P), errs(n);
  nets::flatten(p, theta.data());

  TrainTrace trace;
  trace.final_params = p;
  Mat k0;
  const auto record = [&](int t, double loss, double snorm, double cum) {
    Mat kt = nets::empirical_ntk(p, data.X);
    if (t == 0) k0 = kt;
    trace.step.push_back(t);
    trace.loss.push_back(loss);
    trace.step_norm.push_back(snorm);
    trace.cum_step_norm.push_back(cum);
    trace.ntk_drift.push_back(frob_diff(kt, k0));
  };
  const auto loss_of = [&](int t) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      errs[i] = nets::forward(p, data.X.row(i)) - data.y[i];
      s += errs[i] * errs[i];
    }
    const double l = std::sqrt(s);
    if (!std::isfinite(l))
      throw std::runtime_error("non-finite loss at step " + std::to_string(t));
    return l;
  };

  double cum = 0.0;
  double loss = loss_of(0);
  trace.r0 = loss;
  record(0, loss, 0.0, 0.0);
  for (int t = 1; t <= config.steps; ++t) {
    // gradient of 0.5 sum e^2: J^T e over the trainable block
    std::fill(grad.begin(), grad.begin() + Pt, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      nets::jacobian(p, data.X.row(i), jac.data());
      simd::axpy(errs[i], jac.data(), grad.data(), Pt);
    }
    simd::axpy(-config.learning_rate, grad.data(), theta.data(), Pt);
    nets::unflatten(p, theta.data());
    const double snorm =
        config.learning_rate * std::sqrt(simd::dot(grad.data(), grad.data(), Pt));
    cum += snorm;
    loss = loss_of(t);
    if (t % config.record_ntk_every == 0 || t == config.steps)
      record(t, loss, snorm, cum);
  }
  trace.final_params = p;
  return trace;
}

double max_safe_lr(const Mat& gram) {
  const auto [lmin, lmax] = regress::spectrum_bounds(gram);
  if (lmin + lmax <= 0.0) throw std::invalid_argument("gram spectrum is not positive");
  return 2.0 / (lmin + lmax);
}

StabilityReport stability_report(const TrainTrace& trace, const Mat& analytic_gram, double eta0) {
  if (trace.step.empty()) throw std::invalid_argument("empty trace");
  StabilityReport rep;
  const auto [lmin, lmax] = regress::spectrum_bounds(analytic_gram);
  rep.lambda_min = lmin;
  rep.lambda_max = lmax;
  rep.eta0 = eta0;
  rep.r0 = trace.r0;
  const double rate = 1.0 - eta0 * lmin / 3.0;
  for (std::size_t i = 0; i < trace.step.size(); ++i) {
    const double env = std::pow(rate, trace.step[i]) * trace.r0;
    rep.envelope.push_back(env);
    rep.margin.push_back(env - trace.loss[i]);
    if (trace.loss[i] > env && rep.first_violation_step < 0) {
      rep.envelope_ok = false;
      rep.first_violation_step = trace.step[i];
    }
    rep.sup_drift = std::max(rep.sup_drift, trace.ntk_drift[i]);
  }
  rep.final_cum_step_norm = trace.cum_step_norm.back();
  return rep;
}

} // namespace hpntk::gd
