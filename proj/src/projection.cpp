#include "relucert/projection.hpp"

#include <cmath>
#include <limits>

#include "relucert/kernels.hpp"

namespace relucert {

namespace {

double degenerate_distance(const Constraint& c) {
  if (c.kind == ConstraintKind::kDecision && c.offset >= 0.0) return 0.0;
  return std::numeric_limits<double>::infinity();
}

void check_dims(const InputPoint& x, const Constraint& c) {
  if (x.size() != c.normal.size()) {
    throw InputError("point has " + std::to_string(x.size()) +
                     " entries, constraint normal has " +
                     std::to_string(c.normal.size()));
  }
}

}  // namespace

ProjectionResult project(const InputPoint& x, const Constraint& c) {
  check_dims(x, c);
  if (!all_finite(x)) throw InputError("projection point contains non-finite entries");
  ProjectionResult r;
  if (c.degenerate()) {
    r.distance = degenerate_distance(c);
    return r;
  }
  const double value = kernels::dot(c.normal.data(), x.data(), x.size()) + c.offset;
  r.distance = std::abs(value) / c.norm;
  Vector p = x;
  kernels::axpy(-value / (c.norm * c.norm), c.normal.data(), p.data(), p.size());
  r.point = std::move(p);
  return r;
}

std::vector<double> batch_distances(const InputPoint& x,
                                    const std::vector<Constraint>& constraints) {
  std::vector<double> out(constraints.size());
  if (constraints.empty()) return out;
  // Stack the normals once so the inner loop is a single matvec.
  const std::size_t m = x.size();
  Matrix stacked(constraints.size(), m);
  Vector offsets(constraints.size());
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    check_dims(x, constraints[i]);
    std::copy(constraints[i].normal.begin(), constraints[i].normal.end(),
              stacked.row(i));
    offsets[i] = constraints[i].offset;
  }
  if (!all_finite(x)) throw InputError("batch point contains non-finite entries");
  Vector values(constraints.size());
  kernels::matvec(stacked.data.data(), offsets.data(), x.data(), values.data(),
                  constraints.size(), m);
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const Constraint& c = constraints[i];
    out[i] = c.degenerate() ? degenerate_distance(c) : std::abs(values[i]) / c.norm;
  }
  return out;
}

}  // namespace relucert
