#include "hpntk/regress.h"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hpntk/mc.h"

namespace hpntk::regress {

namespace {

Eigen::MatrixXd to_eigen(const Mat& a) {
  Eigen::MatrixXd m(a.rows, a.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) m(i, j) = a(i, j);
  return m;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

} // namespace

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty dataset: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || header.back() != "y")
    throw std::runtime_error("dataset header must be x1..xd,y");
  const std::size_t d = header.size() - 1;
  for (std::size_t j = 0; j < d; ++j)
    if (header[j] != "x" + std::to_string(j + 1))
      throw std::runtime_error("dataset header must be x1..xd,y");
  std::vector<double> xs, ys;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != d + 1)
      throw std::runtime_error("dataset row " + std::to_string(n + 1) + " has wrong arity");
    for (std::size_t j = 0; j <= d; ++j) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cells[j], &used);
      } catch (const std::exception&) {
        used = 0; // fold stod's invalid_argument/out_of_range into the contract below
      }
      if (cells[j].empty() || used != cells[j].size())
        throw std::runtime_error("bad number in dataset row " + std::to_string(n + 1));
      (j < d ? xs : ys).push_back(v);
    }
    ++n;
  }
  if (n == 0) throw std::runtime_error("dataset has no rows: " + path);
  Dataset ds;
  ds.X = Mat(n, d);
  std::copy(xs.begin(), xs.end(), ds.X.a.begin());
  ds.y = std::move(ys);
  return ds;
}

double kernel_value(const kernels::KernelModel& model, const double* x, const double* xp) {
  if (model.family != kernels::Family::polynl) return kernels::eval(model, x, xp);
  if (model.mc_samples <= 0 || model.mc_width <= 0)
    throw std::invalid_argument("polynl kernel needs mc_samples and mc_width");
  nets::PolyNLSpec spec{model.mc_width, model.input_dim, model.mc_seed};
  return mc::polynl_ntk_mc(spec, x, xp, static_cast<std::size_t>(model.mc_samples),
                           model.mc_seed)
      .value;
}

GramMatrix assemble_gram(const kernels::KernelModel& model, const Mat& X) {
  const std::size_t n = X.rows, d = X.cols;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      bool same = true;
      for (std::size_t c = 0; c < d && same; ++c) same = X(i, c) == X(j, c);
      if (same)
        throw std::invalid_argument("duplicate rows " + std::to_string(i) + "," +
                                    std::to_string(j) + " in design matrix");
    }
  GramMatrix g;
  g.entries = Mat(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = kernel_value(model, X.row(i), X.row(j));
      g.entries(i, j) = v;
      g.entries(j, i) = v;
    }
  return g;
}

RegressionModel fit(const kernels::KernelModel& model, const Dataset& data, double jitter) {
  if (data.y.size() != data.X.rows) throw std::invalid_argument("label count mismatch");
  const std::size_t n = data.X.rows;
  GramMatrix gram = assemble_gram(model, data.X);
  const Eigen::MatrixXd K = to_eigen(gram.entries);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(data.y.data(), n);
  const double yinf = y.lpNorm<Eigen::Infinity>();
  const double cap = 1e-6 * K.trace() / static_cast<double>(n);

  const double kdiag_max = K.diagonal().maxCoeff();

  double j = jitter;
  while (true) {
    Eigen::MatrixXd Kj = K;
    Kj.diagonal().array() += j;
    Eigen::LLT<Eigen::MatrixXd> llt(Kj);
    if (llt.info() == Eigen::Success) {
      Eigen::VectorXd alpha = llt.solve(y);
      alpha += llt.solve(y - Kj * alpha);  // one refinement round
      const double resid = (Kj * alpha - y).lpNorm<Eigen::Infinity>();
      // a rank-deficient gram can pass LLT on rounding-level pivots with a huge alpha;
      // predictions then drown in cancellation, so the rounding floor of a prediction
      // (ulp * |alpha|_1 * kernel scale) must also sit below the residual contract
      const double noise_floor = 1e-16 * alpha.lpNorm<1>() * std::max(kdiag_max, 1.0);
      const double tol = 1e-8 * std::max(yinf, 1e-300);
      if (resid <= tol && noise_floor <= tol) {
        RegressionModel rm;
        rm.data = data;
        rm.kernel = model;
        rm.alpha.assign(alpha.data(), alpha.data() + n);
        rm.jitter = j;
        rm.residual_inf = resid;
        return rm;
      }
    }
    if (j >= cap) {
      const auto [lmin, lmax] = spectrum_bounds(gram.entries);
      throw std::runtime_error("gram solve failed at jitter cap; lambda_min = " +
                               std::to_string(lmin) + ", lambda_max = " + std::to_string(lmax));
    }
    j = j == 0.0 ? 1e-12 : std::min(10.0 * j, cap);
  }
}

double predict(const RegressionModel& model, const double* x) {
  double s = 0.0;
  for (std::size_t i = 0; i < model.data.X.rows; ++i)
    s += model.alpha[i] * kernel_value(model.kernel, x, model.data.X.row(i));
  return s;
}

std::pair<double, double> spectrum_bounds(const Mat& gram) {
  if (gram.rows != gram.cols || gram.rows == 0) throw std::invalid_argument("gram must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(gram), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolve failed");
  const auto& ev = es.eigenvalues();
  return {ev(0), ev(ev.size() - 1)};
}

} // namespace hpntk::regress
