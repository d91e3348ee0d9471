#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "relucert/network.hpp"
#include "relucert/region.hpp"
#include "relucert/types.hpp"

namespace relucert::testing {

// Constraint with the norm cache filled in, for tests that build geometry by
// hand instead of deriving it from a network.
Constraint make_constraint(Vector normal, double offset,
                           ConstraintKind kind = ConstraintKind::kActivation,
                           std::size_t index = 0);

// Row-major matrix literal; values.size() must equal rows * cols.
Matrix make_matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

// Layer-by-layer evaluation with plain loops, deliberately independent of the
// kernels module, so numeric tests have a second opinion.
Vector naive_forward(const Network& net, const Vector& x);

// Two inputs, identity hidden layer, logits (x1 - x2, x2 - x1). Four
// activation regions, one decision boundary on the diagonal.
Network h1_network();

// Two-input, two-class net whose decision boundary near the origin sits at
// x1 + x2 = a inside the region {x1 <= 1} and bends to slope 9 past x1 = 1.
// Querying x = (0, 0) at epsilon = 1.5 exercises three behaviours:
//   a = 1.2   boundary projection lands inside its region and ties
//   a = 2.05  projection escapes the region; the corner (1, 1.05) is 1.45 away
//   a = 2.12  projection escapes; the corner (1, 1.12) is ~1.5015 away
Network trichotomy_network(double a);

// Uniform double in [0, 1) from raw generator bits; identical on every
// platform, unlike std::uniform_real_distribution.
double uniform01(std::mt19937_64& rng);

// Uniform in [lo, hi).
double uniform_in(std::mt19937_64& rng, double lo, double hi);

Vector random_point(std::mt19937_64& rng, std::size_t dim, double lo, double hi);

}  // namespace relucert::testing
