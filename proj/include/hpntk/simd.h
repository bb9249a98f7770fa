#pragma once
#include <cstddef>

// Small double-precision kernels with a scalar reference path and an AVX2 path
// selected at runtime. Both paths follow one blocking contract: two groups of
// four lane accumulators, fused multiply-add per lane, and a single fixed
// combine order, so results are bit-identical across paths. Dispatch resolves
// once per process; HPNTK_SIMD=scalar|avx2 overrides CPU detection.
namespace hpntk::simd {

enum class Isa { scalar, avx2 };

Isa active();
const char* isa_name(Isa isa);

// sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);
// sum_i a[i]
double sum(const double* a, std::size_t n);
// y[i] += alpha*x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);
// x[i] *= alpha
void scale(double alpha, double* x, std::size_t n);
// out[i] = a[i]*b[i]
void mul(const double* a, const double* b, double* out, std::size_t n);
// a[i] *= b[i]
void mul_inplace(double* a, const double* b, std::size_t n);
// out[i] = a[i] > 0 ? a[i] : 0
void relu(const double* a, double* out, std::size_t n);
// out[i] = gate[i] > 0 ? alpha*((a[i]*b[i])*c[i]) : 0
void gated_mul3(double alpha, const double* a, const double* b, const double* c,
                const double* gate, double* out, std::size_t n);

// Both implementations exposed for the cross-path equivalence tests.
namespace detail {
double dot_scalar(const double* a, const double* b, std::size_t n);
double dot_avx2(const double* a, const double* b, std::size_t n);
double sum_scalar(const double* a, std::size_t n);
double sum_avx2(const double* a, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void scale_scalar(double alpha, double* x, std::size_t n);
void scale_avx2(double alpha, double* x, std::size_t n);
void mul_scalar(const double* a, const double* b, double* out, std::size_t n);
void mul_avx2(const double* a, const double* b, double* out, std::size_t n);
void relu_scalar(const double* a, double* out, std::size_t n);
void relu_avx2(const double* a, double* out, std::size_t n);
void gated_mul3_scalar(double alpha, const double* a, const double* b, const double* c,
                       const double* gate, double* out, std::size_t n);
void gated_mul3_avx2(double alpha, const double* a, const double* b, const double* c,
                     const double* gate, double* out, std::size_t n);
bool cpu_has_avx2();
} // namespace detail

} // namespace hpntk::simd
