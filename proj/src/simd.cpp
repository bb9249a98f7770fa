#include "hpntk/simd.h"

#include <cmath>
#include <cstdlib>
#include <cstring>

namespace hpntk::simd {

namespace detail {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

// Blocked reduction: 8 elements per iteration across two 4-lane groups, then
// lanes combine as ((l0+l1)+(l2+l3)) per group, group0+group1, tail last.
double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s0[4] = {0, 0, 0, 0}, s1[4] = {0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (int l = 0; l < 4; ++l) s0[l] = std::fma(a[i + l], b[i + l], s0[l]);
    for (int l = 0; l < 4; ++l) s1[l] = std::fma(a[i + 4 + l], b[i + 4 + l], s1[l]);
  }
  double tail = 0.0;
  for (; i < n; ++i) tail = std::fma(a[i], b[i], tail);
  return ((s0[0] + s0[1]) + (s0[2] + s0[3])) + ((s1[0] + s1[1]) + (s1[2] + s1[3])) + tail;
}

double sum_scalar(const double* a, std::size_t n) {
  double s0[4] = {0, 0, 0, 0}, s1[4] = {0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (int l = 0; l < 4; ++l) s0[l] += a[i + l];
    for (int l = 0; l < 4; ++l) s1[l] += a[i + 4 + l];
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i];
  return ((s0[0] + s0[1]) + (s0[2] + s0[3])) + ((s1[0] + s1[1]) + (s1[2] + s1[3])) + tail;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void scale_scalar(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void relu_scalar(const double* a, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
}

void gated_mul3_scalar(double alpha, const double* a, const double* b, const double* c,
                       const double* gate, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = gate[i] > 0.0 ? alpha * ((a[i] * b[i]) * c[i]) : 0.0;
}

} // namespace detail

namespace {

Isa resolve() {
  if (const char* env = std::getenv("HPNTK_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
    if (std::strcmp(env, "avx2") == 0 && detail::cpu_has_avx2()) return Isa::avx2;
    if (std::strcmp(env, "avx2") == 0) return Isa::scalar; // requested but unavailable
  }
  return detail::cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

} // namespace

Isa active() {
  static const Isa isa = resolve();
  return isa;
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

double dot(const double* a, const double* b, std::size_t n) {
  return active() == Isa::avx2 ? detail::dot_avx2(a, b, n) : detail::dot_scalar(a, b, n);
}

double sum(const double* a, std::size_t n) {
  return active() == Isa::avx2 ? detail::sum_avx2(a, n) : detail::sum_scalar(a, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active() == Isa::avx2 ? detail::axpy_avx2(alpha, x, y, n) : detail::axpy_scalar(alpha, x, y, n);
}

void scale(double alpha, double* x, std::size_t n) {
  active() == Isa::avx2 ? detail::scale_avx2(alpha, x, n) : detail::scale_scalar(alpha, x, n);
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
  active() == Isa::avx2 ? detail::mul_avx2(a, b, out, n) : detail::mul_scalar(a, b, out, n);
}

void mul_inplace(double* a, const double* b, std::size_t n) { mul(a, b, a, n); }

void relu(const double* a, double* out, std::size_t n) {
  active() == Isa::avx2 ? detail::relu_avx2(a, out, n) : detail::relu_scalar(a, out, n);
}

void gated_mul3(double alpha, const double* a, const double* b, const double* c,
                const double* gate, double* out, std::size_t n) {
  active() == Isa::avx2 ? detail::gated_mul3_avx2(alpha, a, b, c, gate, out, n)
                        : detail::gated_mul3_scalar(alpha, a, b, c, gate, out, n);
}

} // namespace hpntk::simd
