#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "relucert/network.hpp"
#include "relucert/region.hpp"
#include "relucert/types.hpp"

namespace relucert {

// Exhaustive enumeration is exponential in the hidden neuron count, so the
// oracle refuses anything larger than this.
inline constexpr std::size_t kOracleMaxNeurons = 20;

struct CatalogEntry {
  ActivationPattern pattern;
  // A point satisfying every activation constraint of the pattern, strictly
  // interior when the region has full dimension.
  Vector witness;
  RegionAffineMap map;
};

struct RegionCatalog {
  std::vector<CatalogEntry> entries;  // ascending pattern_key order
  // Patterns whose feasibility the solver could not settle. Always 0 on the
  // well-conditioned networks the oracle is meant for; nonzero values mean
  // the catalog may be incomplete and downstream answers are suspect.
  std::size_t unresolved = 0;
};

// All activation patterns whose constraint systems admit a solution. Prunes
// by prefix feasibility: a neuron's frozen form only depends on bits of
// earlier layers, so an infeasible prefix rules out every completion.
RegionCatalog enumerate_feasible_patterns(const Network& net);

struct MinDistortion {
  // Smallest distance from x to any point that ties with or beats the
  // predicted class. Infinity when no such point exists.
  double distance = 0.0;
  std::optional<Vector> witness;
  std::size_t unresolved = 0;  // solver candidates that failed to converge
};

// Ground-truth minimal adversarial distortion by brute force over every
// feasible region and competitor class.
MinDistortion exact_min_distortion(const Network& net, const InputPoint& x);

// Ground-truth robustness: no adversarial point within epsilon of x.
bool robust_oracle(const Network& net, const InputPoint& x, double epsilon);

}  // namespace relucert
