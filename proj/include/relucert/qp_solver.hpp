#pragma once

#include <optional>
#include <vector>

#include "relucert/region.hpp"
#include "relucert/types.hpp"

namespace relucert {

// Nearest-point problem over a conjunction of closed half-spaces
// (normal * z + offset <= 0) with an optional hyperplane the minimiser must
// lie on. The equality normal must be non-degenerate when present.
struct RegionProblem {
  InputPoint x;
  std::vector<Constraint> inequalities;
  std::optional<Constraint> equality;
};

enum class SolverStatus { kFeasible, kInfeasible, kNotConverged };

struct SolverOutcome {
  SolverStatus status = SolverStatus::kNotConverged;
  double distance = 0.0;
  Vector witness;
  std::size_t iterations = 0;
};

// Exact minimum distance from problem.x to the feasible set, via a dual
// active-set method on the least-distance quadratic. Infeasible outcomes are
// backed by a numerically verified Farkas certificate; when verification
// fails the result degrades to kNotConverged, which callers must treat as
// unknown, never as evidence of robustness.
SolverOutcome min_distance_on_boundary(const RegionProblem& problem);

struct FeasibilityOutcome {
  SolverStatus status = SolverStatus::kNotConverged;
  Vector witness;
};

// Linear feasibility of the closed system. Prefers a strict-interior witness
// when one exists (a second, margin-tightened solve); otherwise any feasible
// point is returned.
FeasibilityOutcome feasibility(const std::vector<Constraint>& inequalities,
                               std::size_t dim);

// Single-solve variant for yes/no pruning. Skips the interior-preferring
// pass, so the witness may sit on a face.
FeasibilityOutcome feasibility_any(const std::vector<Constraint>& inequalities,
                                   std::size_t dim);

}  // namespace relucert
