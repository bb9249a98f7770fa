#include "hpntk/nets.h"

#include <cmath>
#include <stdexcept>

#include "hpntk/rng.h"
#include "hpntk/simd.h"

namespace hpntk::nets {

namespace {

using kernels::Family;

// substream keys inside one net's seed space
constexpr std::uint64_t kKeyLayerBase = 1;  // layer n -> key n
constexpr std::uint64_t kKeyOut = 0x10000;
constexpr std::uint64_t kKeyQ = 0x10001;
constexpr std::uint64_t kKeyK = 0x10002;
constexpr std::uint64_t kKeyV = 0x10003;

// W is stored transposed (d x m) so both the forward pass (axpy per input
// coordinate) and the rank-1 training updates run along contiguous width-m
// rows. Draw order is the logical m x d row-major order, so the parameter
// stream does not depend on the storage layout.
Mat draw_layer(int m, int d, std::uint64_t seed, std::uint64_t key) {
  Mat W(static_cast<std::size_t>(d), static_cast<std::size_t>(m));
  rng::Gaussian g(rng::substream(seed, key));
  for (int r = 0; r < m; ++r)
    for (int j = 0; j < d; ++j) W(j, r) = g.next();
  return W;
}

double out_scale(int N, int m) { return std::sqrt(std::pow(2.0, N + 1) / m); }

// pre-activations a_n = W_n x for every layer
void preacts(const NetParams& p, const double* x, std::vector<std::vector<double>>& a) {
  const std::size_t m = static_cast<std::size_t>(p.spec.m);
  const int d = p.spec.d;
  a.resize(p.W.size());
  for (std::size_t n = 0; n < p.W.size(); ++n) {
    a[n].assign(m, 0.0);
    for (int j = 0; j < d; ++j) simd::axpy(x[j], p.W[n].row(j), a[n].data(), m);
  }
}

void activate(Family fam, const std::vector<double>& a, std::vector<double>& z) {
  z.resize(a.size());
  if (fam == Family::pnn) {
    simd::relu(a.data(), z.data(), a.size());
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) z[i] = std::sin(a[i]);
  }
}

double product_forward(const NetParams& p, const double* x) {
  const std::size_t m = static_cast<std::size_t>(p.spec.m);
  std::vector<std::vector<double>> a;
  preacts(p, x, a);
  std::vector<double> prod(m, 1.0), z;
  for (std::size_t n = 0; n < a.size(); ++n) {
    activate(p.spec.family, a[n], z);
    simd::mul_inplace(prod.data(), z.data(), m);
  }
  return out_scale(p.spec.n, p.spec.m) * simd::dot(p.w_out.data(), prod.data(), m);
}

} // namespace

NetParams init_params(const ArchSpec& spec) {
  if (spec.n < 2) throw std::invalid_argument("order/depth must be >= 2");
  if (spec.m < 1 || spec.d < 1) throw std::invalid_argument("width and input_dim must be positive");
  NetParams p;
  p.spec = spec;
  if (spec.family == Family::mlp)
    throw std::invalid_argument("finite mlp nets are not part of this artifact");
  if (spec.family == Family::polynl) {
    PolyNLSpec ps{spec.m, spec.d, spec.seed};
    return polynl_init(ps);
  }
  const int N = spec.n;
  p.W.reserve(N);
  for (int n = 0; n < N; ++n)
    p.W.push_back(draw_layer(spec.m, spec.d, spec.seed, kKeyLayerBase + n));
  p.w_out.resize(spec.m);
  rng::fill_gaussian(p.w_out.data(), p.w_out.size(), spec.seed, kKeyOut);
  return p;
}

NetParams polynl_init(const PolyNLSpec& spec) {
  NetParams p;
  p.spec = ArchSpec{Family::polynl, 2, spec.m, spec.d, spec.seed};
  p.W.push_back(draw_layer(spec.m, spec.d, spec.seed, kKeyLayerBase));
  p.w_out.resize(spec.m);
  rng::fill_gaussian(p.w_out.data(), p.w_out.size(), spec.seed, kKeyOut);
  p.w_q.resize(spec.m);
  p.w_k.resize(spec.m);
  rng::fill_gaussian(p.w_q.data(), p.w_q.size(), spec.seed, kKeyQ);
  rng::fill_gaussian(p.w_k.data(), p.w_k.size(), spec.seed, kKeyK);
  double v;
  rng::fill_gaussian(&v, 1, spec.seed, kKeyV);
  p.w_v = v;
  return p;
}

double pnn_forward(const NetParams& p, const double* x) {
  if (p.spec.family != Family::pnn) throw std::invalid_argument("params are not a pnn");
  return product_forward(p, x);
}

double mfn_forward(const NetParams& p, const double* x) {
  if (p.spec.family != Family::mfn) throw std::invalid_argument("params are not an mfn");
  return product_forward(p, x);
}

double polynl_forward(const NetParams& p, const double* x) {
  if (p.spec.family != Family::polynl) throw std::invalid_argument("params are not a polynl block");
  const std::size_t m = static_cast<std::size_t>(p.spec.m);
  std::vector<std::vector<double>> a;
  preacts(p, x, a);
  std::vector<double> y2(m);
  simd::relu(a[0].data(), y2.data(), m);
  std::vector<double> u(m);
  simd::mul(y2.data(), y2.data(), u.data(), m);
  // row i of the attention logits is (w_q[i] w_k[i]) * u
  double f = 0.0;
  std::vector<double> soft(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double s = p.w_q[i] * p.w_k[i];
    double mx = s * u[0];
    for (std::size_t j = 1; j < m; ++j) mx = std::max(mx, s * u[j]);
    double denom = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      soft[j] = std::exp(s * u[j] - mx);
      denom += soft[j];
    }
    const double y3_i = p.w_v * simd::dot(soft.data(), y2.data(), m) / denom;
    f += p.w_out[i] * y3_i;
  }
  return std::sqrt(2.0 / p.spec.m) * f;
}

double forward(const NetParams& p, const double* x) {
  switch (p.spec.family) {
    case Family::pnn: return pnn_forward(p, x);
    case Family::mfn: return mfn_forward(p, x);
    case Family::polynl: return polynl_forward(p, x);
    default: throw std::invalid_argument("no finite forward for this family");
  }
}

namespace {

// Per-layer output-side gradient factors: U_n[r] = c * w_out[r] * prefix[r] *
// suffix[r] * actdot_n[r]; the gradient block for W_n is U_n x^T and the
// w_out block is c * (z_1 * ... * z_N).
struct ProductTape {
  std::vector<std::vector<double>> a, z, pre, suf;
  std::vector<double> full;  // z_1 * ... * z_N
  double c = 0.0;
};

void run_tape(const NetParams& p, const double* x, ProductTape& t) {
  const std::size_t m = static_cast<std::size_t>(p.spec.m);
  const std::size_t N = p.W.size();
  preacts(p, x, t.a);
  t.z.resize(N);
  for (std::size_t n = 0; n < N; ++n) activate(p.spec.family, t.a[n], t.z[n]);
  t.pre.assign(N, {});
  t.suf.assign(N, {});
  std::vector<double> acc(m, 1.0);
  for (std::size_t n = 0; n < N; ++n) {
    t.pre[n] = acc;
    simd::mul_inplace(acc.data(), t.z[n].data(), m);
  }
  t.full = acc;
  acc.assign(m, 1.0);
  for (std::size_t n = N; n-- > 0;) {
    t.suf[n] = acc;
    simd::mul_inplace(acc.data(), t.z[n].data(), m);
  }
  t.c = out_scale(p.spec.n, p.spec.m);
}

void layer_factor(const NetParams& p, const ProductTape& t, std::size_t n, std::vector<double>& un) {
  const std::size_t m = static_cast<std::size_t>(p.spec.m);
  un.resize(m);
  if (p.spec.family == Family::pnn) {
    simd::gated_mul3(t.c, p.w_out.data(), t.pre[n].data(), t.suf[n].data(), t.a[n].data(),
                     un.data(), m);
  } else {
    simd::mul(p.w_out.data(), t.pre[n].data(), un.data(), m);
    simd::mul_inplace(un.data(), t.suf[n].data(), m);
    for (std::size_t r = 0; r < m; ++r) un[r] = t.c * un[r] * std::cos(t.a[n][r]);
  }
}

} // namespace

void gradient_factors(const NetParams& p, const double* x, Mat& U,
                      std::vector<double>& wout_block) {
  if (p.spec.family != Family::pnn && p.spec.family != Family::mfn)
    throw std::invalid_argument("gradient factors cover the product families only");
  const std::size_t m = static_cast<std::size_t>(p.spec.m);
  const std::size_t N = p.W.size();
  ProductTape t;
  run_tape(p, x, t);
  if (U.rows != N || U.cols != m) U = Mat(N, m);
  std::vector<double> un;
  for (std::size_t n = 0; n < N; ++n) {
    layer_factor(p, t, n, un);
    std::copy(un.begin(), un.end(), U.row(n));
  }
  wout_block.resize(m);
  for (std::size_t r = 0; r < m; ++r) wout_block[r] = t.c * t.full[r];
}

void jacobian(const NetParams& p, const double* x, double* out) {
  const std::size_t m = static_cast<std::size_t>(p.spec.m);
  const int d = p.spec.d;
  Mat U;
  std::vector<double> wout_block;
  gradient_factors(p, x, U, wout_block);
  std::size_t off = 0;
  for (std::size_t n = 0; n < p.W.size(); ++n) {
    const double* un = U.row(n);
    for (std::size_t r = 0; r < m; ++r)
      for (int j = 0; j < d; ++j) out[off + r * d + j] = un[r] * x[j];
    off += m * d;
  }
  std::copy(wout_block.begin(), wout_block.end(), out + off);
}

Mat empirical_ntk(const NetParams& p, const Mat& X) {
  if (p.spec.family != Family::pnn && p.spec.family != Family::mfn)
    throw std::invalid_argument("empirical ntk covers the product families only");
  if (X.cols != static_cast<std::size_t>(p.spec.d)) throw std::invalid_argument("input dim mismatch");
  const std::size_t n = X.rows, m = static_cast<std::size_t>(p.spec.m);
  const std::size_t N = p.W.size();
  // layer factors for all samples: K^_ij = sum_n (U_n[i].U_n[j]) (x_i.x_j) + V[i].V[j]
  std::vector<Mat> U(N, Mat(n, m));
  Mat V(n, m);
  Mat Ui;
  std::vector<double> vi;
  for (std::size_t i = 0; i < n; ++i) {
    gradient_factors(p, X.row(i), Ui, vi);
    for (std::size_t l = 0; l < N; ++l) std::copy(Ui.row(l), Ui.row(l) + m, U[l].row(i));
    std::copy(vi.begin(), vi.end(), V.row(i));
  }
  Mat K(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double xx = simd::dot(X.row(i), X.row(j), X.cols);
      double s = simd::dot(V.row(i), V.row(j), m);
      for (std::size_t l = 0; l < N; ++l) s += simd::dot(U[l].row(i), U[l].row(j), m) * xx;
      K(i, j) = s;
      K(j, i) = s;
    }
  }
  return K;
}

double finite_diff_check(const NetParams& p, const double* x, double eps) {
  const std::size_t P = p.theta_size();
  std::vector<double> grad(P), theta(P);
  jacobian(p, x, grad.data());
  flatten(p, theta.data());
  NetParams probe = p;
  double worst = 0.0;
  constexpr double kFloor = 1e-8;
  for (std::size_t i = 0; i < P; ++i) {
    const double keep = theta[i];
    theta[i] = keep + eps;
    unflatten(probe, theta.data());
    const double fp = forward(probe, x);
    theta[i] = keep - eps;
    unflatten(probe, theta.data());
    const double fm = forward(probe, x);
    theta[i] = keep;
    const double fd = (fp - fm) / (2.0 * eps);
    const double rel = std::fabs(fd - grad[i]) / (std::fabs(grad[i]) + kFloor);
    worst = std::max(worst, rel);
  }
  unflatten(probe, theta.data());
  return worst;
}

void flatten(const NetParams& p, double* theta) {
  if (p.spec.family == Family::polynl)
    throw std::invalid_argument("flatten covers the product families only");
  const std::size_t m = static_cast<std::size_t>(p.spec.m);
  const int d = p.spec.d;
  std::size_t off = 0;
  for (const Mat& W : p.W) {
    for (std::size_t r = 0; r < m; ++r)
      for (int j = 0; j < d; ++j) theta[off + r * d + j] = W(j, r);
    off += m * d;
  }
  for (std::size_t r = 0; r < m; ++r) theta[off + r] = p.w_out[r];
}

void unflatten(NetParams& p, const double* theta) {
  if (p.spec.family == Family::polynl)
    throw std::invalid_argument("unflatten covers the product families only");
  const std::size_t m = static_cast<std::size_t>(p.spec.m);
  const int d = p.spec.d;
  std::size_t off = 0;
  for (Mat& W : p.W) {
    for (std::size_t r = 0; r < m; ++r)
      for (int j = 0; j < d; ++j) W(j, r) = theta[off + r * d + j];
    off += m * d;
  }
  for (std::size_t r = 0; r < m; ++r) p.w_out[r] = theta[off + r];
}

} // namespace hpntk::nets
