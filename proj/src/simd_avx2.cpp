#include "hpntk/simd.h"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>

namespace hpntk::simd::detail {

namespace {
// Lane combine shared by the reductions; order matches the scalar path.
inline double combine(__m256d v0, __m256d v1, double tail) {
  alignas(32) double l0[4], l1[4];
  _mm256_store_pd(l0, v0);
  _mm256_store_pd(l1, v1);
  return ((l0[0] + l0[1]) + (l0[2] + l0[3])) + ((l1[0] + l1[1]) + (l1[2] + l1[3])) + tail;
}
} // namespace

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
  }
  double tail = 0.0;
  for (; i < n; ++i) tail = __builtin_fma(a[i], b[i], tail);
  return combine(s0, s1, tail);
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_add_pd(s0, _mm256_loadu_pd(a + i));
    s1 = _mm256_add_pd(s1, _mm256_loadu_pd(a + i + 4));
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i];
  return combine(s0, s1, tail);
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] = __builtin_fma(alpha, x[i], y[i]);
}

void scale_avx2(double alpha, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), va));
  for (; i < n; ++i) x[i] *= alpha;
}

void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void relu_avx2(const double* a, double* out, std::size_t n) {
  const __m256d z = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(a + i);
    // keep v only where v > 0; compares false on -0.0 like the scalar path
    _mm256_storeu_pd(out + i, _mm256_and_pd(v, _mm256_cmp_pd(v, z, _CMP_GT_OQ)));
  }
  for (; i < n; ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
}

void gated_mul3_avx2(double alpha, const double* a, const double* b, const double* c,
                     const double* gate, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d z = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    v = _mm256_mul_pd(v, _mm256_loadu_pd(c + i));
    v = _mm256_mul_pd(va, v);
    const __m256d m = _mm256_cmp_pd(_mm256_loadu_pd(gate + i), z, _CMP_GT_OQ);
    _mm256_storeu_pd(out + i, _mm256_and_pd(v, m));
  }
  for (; i < n; ++i) out[i] = gate[i] > 0.0 ? alpha * ((a[i] * b[i]) * c[i]) : 0.0;
}

} // namespace hpntk::simd::detail

#else

// Non-x86 fallback: the AVX2 entry points forward to the scalar kernels.
namespace hpntk::simd::detail {
double dot_avx2(const double* a, const double* b, std::size_t n) { return dot_scalar(a, b, n); }
double sum_avx2(const double* a, std::size_t n) { return sum_scalar(a, n); }
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) { axpy_scalar(alpha, x, y, n); }
void scale_avx2(double alpha, double* x, std::size_t n) { scale_scalar(alpha, x, n); }
void mul_avx2(const double* a, const double* b, double* out, std::size_t n) { mul_scalar(a, b, out, n); }
void relu_avx2(const double* a, double* out, std::size_t n) { relu_scalar(a, out, n); }
void gated_mul3_avx2(double alpha, const double* a, const double* b, const double* c,
                     const double* gate, double* out, std::size_t n) {
  gated_mul3_scalar(alpha, a, b, c, gate, out, n);
}
} // namespace hpntk::simd::detail

#endif
