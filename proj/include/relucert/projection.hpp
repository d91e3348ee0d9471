#pragma once

#include <optional>
#include <vector>

#include "relucert/region.hpp"
#include "relucert/types.hpp"

namespace relucert {

struct ProjectionResult {
  double distance = 0.0;
  // Nearest point on the constraint hyperplane; absent for degenerate
  // normals, where no projection exists.
  std::optional<Vector> point;
};

// Distance from x to the hyperplane normal * p + offset = 0, and the nearest
// point on it. Degenerate normals yield +inf (the facet can never be
// crossed), with one carve-out: a zero-normal decision constraint with
// offset >= 0 means the whole source region is tied or misclassified, so it
// is reported as an immediate boundary hit at distance 0.
ProjectionResult project(const InputPoint& x, const Constraint& c);

// Elementwise project(x, c).distance over the batch, computed as one matrix
// pass over the stacked normals.
std::vector<double> batch_distances(const InputPoint& x,
                                    const std::vector<Constraint>& constraints);

}  // namespace relucert
