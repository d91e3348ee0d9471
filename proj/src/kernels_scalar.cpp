#include "relucert/kernels.hpp"

namespace relucert::kernels::detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void matvec_scalar(const double* w, const double* bias, const double* x,
                   double* out, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    out[r] = dot_scalar(w + r * cols, x, cols) + (bias ? bias[r] : 0.0);
  }
}

}  // namespace relucert::kernels::detail
