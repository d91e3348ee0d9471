#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "relucert/kernels.hpp"
#include "test_support.hpp"

using namespace relucert;
using relucert::testing::random_point;

namespace {

// Restores automatic dispatch even when an assertion throws mid-test.
struct BackendGuard {
  ~BackendGuard() { kernels::set_backend(kernels::Backend::kAuto); }
};

double naive_dot(const Vector& a, const Vector& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("dot and axpy match plain loops across sizes and backends") {
  BackendGuard guard;
  std::mt19937_64 rng(11);
  for (const auto backend : {kernels::Backend::kScalar, kernels::Backend::kAvx2}) {
    if (backend == kernels::Backend::kAvx2 && !kernels::avx2_supported()) continue;
    CHECK(kernels::set_backend(backend) == backend);
    // Sizes straddle the 4-lane vector width to cover remainder tails.
    for (std::size_t n : {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 33, 97}) {
      const Vector a = random_point(rng, n, -2.0, 2.0);
      const Vector b = random_point(rng, n, -2.0, 2.0);
      const double expected = naive_dot(a, b);
      CHECK(kernels::dot(a.data(), b.data(), n) ==
            doctest::Approx(expected).epsilon(1e-12));

      Vector y = b;
      kernels::axpy(0.75, a.data(), y.data(), n);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(y[i] == doctest::Approx(b[i] + 0.75 * a[i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("matvec matches plain loops, with and without bias") {
  BackendGuard guard;
  std::mt19937_64 rng(12);
  for (const auto backend : {kernels::Backend::kScalar, kernels::Backend::kAvx2}) {
    if (backend == kernels::Backend::kAvx2 && !kernels::avx2_supported()) continue;
    kernels::set_backend(backend);
    for (std::size_t rows : {1, 2, 5}) {
      for (std::size_t cols : {1, 3, 4, 9, 32, 65}) {
        const Vector w = random_point(rng, rows * cols, -1.0, 1.0);
        const Vector x = random_point(rng, cols, -1.0, 1.0);
        const Vector bias = random_point(rng, rows, -1.0, 1.0);
        Vector with_bias(rows), no_bias(rows);
        kernels::matvec(w.data(), bias.data(), x.data(), with_bias.data(), rows, cols);
        kernels::matvec(w.data(), nullptr, x.data(), no_bias.data(), rows, cols);
        for (std::size_t r = 0; r < rows; ++r) {
          double acc = 0.0;
          for (std::size_t c = 0; c < cols; ++c) acc += w[r * cols + c] * x[c];
          CHECK(no_bias[r] == doctest::Approx(acc).epsilon(1e-12));
          CHECK(with_bias[r] == doctest::Approx(acc + bias[r]).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("scalar and avx2 agree on identical data") {
  if (!kernels::avx2_supported()) return;
  BackendGuard guard;
  std::mt19937_64 rng(13);
  const std::size_t n = 129;
  const Vector a = random_point(rng, n, -3.0, 3.0);
  const Vector b = random_point(rng, n, -3.0, 3.0);

  kernels::set_backend(kernels::Backend::kScalar);
  const double ds = kernels::dot(a.data(), b.data(), n);
  kernels::set_backend(kernels::Backend::kAvx2);
  const double dv = kernels::dot(a.data(), b.data(), n);
  // FMA reassociation moves the result by at most a few ulps.
  CHECK(std::abs(ds - dv) <= 1e-12 * (1.0 + std::abs(ds)));
}

TEST_CASE("requesting avx2 without support falls back to scalar") {
  BackendGuard guard;
  const kernels::Backend got = kernels::set_backend(kernels::Backend::kAvx2);
  if (kernels::avx2_supported()) {
    CHECK(got == kernels::Backend::kAvx2);
  } else {
    CHECK(got == kernels::Backend::kScalar);
  }
  CHECK(kernels::active_backend() == got);
}

}  // TEST_SUITE
