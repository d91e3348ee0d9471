#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace relucert {

using Vector = std::vector<double>;
using InputPoint = Vector;
using Label = int;

// Raised when a caller hands us inputs with the wrong shape or non-finite
// entries. Distinct from ParseError so the CLI can map it to a usage failure.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised by file loaders; the message names the offending field/index.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a problem exceeds a hard size limit (oracle enumeration).
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense row-major matrix. Deliberately minimal: the numeric work happens in
// the kernels module, this is just owned storage with shape.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }
  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

inline bool all_finite(const double* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(p[i])) return false;
  }
  return true;
}

inline bool all_finite(const Vector& v) { return all_finite(v.data(), v.size()); }

}  // namespace relucert
