#pragma once

#include <cstddef>

// Data-parallel inner loops shared by the geometry and search code: dot
// products, axpy accumulation and dense affine application. Each kernel has a
// scalar reference implementation and an AVX2+FMA variant; the public entry
// points dispatch through function pointers chosen at startup (or forced via
// set_backend, which the equivalence tests use).
namespace relucert::kernels {

enum class Backend { kAuto, kScalar, kAvx2 };

// Returns the backend actually in effect. Requesting kAvx2 on a machine
// without AVX2 falls back to kScalar; kAuto probes the CPU.
Backend set_backend(Backend want);
Backend active_backend();
bool avx2_supported();

double dot(const double* a, const double* b, std::size_t n);

// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);

// out = w * x + bias with w row-major (rows x cols); bias may be nullptr.
void matvec(const double* w, const double* bias, const double* x, double* out,
            std::size_t rows, std::size_t cols);

namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void matvec_scalar(const double* w, const double* bias, const double* x,
                   double* out, std::size_t rows, std::size_t cols);

#if defined(RELUCERT_HAVE_AVX2)
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void matvec_avx2(const double* w, const double* bias, const double* x,
                 double* out, std::size_t rows, std::size_t cols);
#endif

}  // namespace detail

}  // namespace relucert::kernels
