#include "relucert/kernels.hpp"

namespace relucert::kernels {

namespace {

using DotFn = double (*)(const double*, const double*, std::size_t);
using AxpyFn = void (*)(double, const double*, double*, std::size_t);
using MatvecFn = void (*)(const double*, const double*, const double*, double*,
                          std::size_t, std::size_t);

struct Dispatch {
  Backend backend;
  DotFn dot;
  AxpyFn axpy;
  MatvecFn matvec;
};

Dispatch make_dispatch(Backend want) {
#if defined(RELUCERT_HAVE_AVX2)
  const bool have = avx2_supported();
  if (want == Backend::kAvx2 || (want == Backend::kAuto && have)) {
    if (have) {
      return {Backend::kAvx2, detail::dot_avx2, detail::axpy_avx2,
              detail::matvec_avx2};
    }
  }
#else
  (void)want;
#endif
  return {Backend::kScalar, detail::dot_scalar, detail::axpy_scalar,
          detail::matvec_scalar};
}

Dispatch& dispatch() {
  static Dispatch d = make_dispatch(Backend::kAuto);
  return d;
}

}  // namespace

bool avx2_supported() {
#if defined(RELUCERT_HAVE_AVX2)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend set_backend(Backend want) {
  dispatch() = make_dispatch(want);
  return dispatch().backend;
}

Backend active_backend() { return dispatch().backend; }

double dot(const double* a, const double* b, std::size_t n) {
  return dispatch().dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  dispatch().axpy(alpha, x, y, n);
}

void matvec(const double* w, const double* bias, const double* x, double* out,
            std::size_t rows, std::size_t cols) {
  dispatch().matvec(w, bias, x, out, rows, cols);
}

}  // namespace relucert::kernels
