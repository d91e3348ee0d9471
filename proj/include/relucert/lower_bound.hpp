#pragma once

#include <chrono>
#include <cstddef>
#include <optional>

#include "relucert/certifier.hpp"
#include "relucert/network.hpp"
#include "relucert/types.hpp"

namespace relucert {

struct LowerBoundConfig {
  std::optional<std::chrono::milliseconds> timeout;
  // Caps the number of dequeue steps. Used by tests to observe the bound
  // mid-search; the CLI never sets it.
  std::optional<std::size_t> max_iterations;
};

enum class LowerBoundStatus { kExhaustedAtEpsilon, kStoppedAtBoundary, kTimeout };

struct LowerBoundOutcome {
  double bound = 0.0;
  LowerBoundStatus status = LowerBoundStatus::kTimeout;
  // Meaningful only for kStoppedAtBoundary: the terminating projection landed
  // inside its source region and is misclassified or tied, so the bound is
  // exactly the minimal adversarial distortion.
  bool tight = false;
  std::optional<Vector> witness;  // present iff tight
  SearchStats stats;
};

// Certified radius free of adversarial examples: no point within `bound` of x
// changes the predicted class. Explores constraints in ascending projection
// distance; the first decision boundary dequeued ends the search because
// everything nearer has already been ruled out.
LowerBoundOutcome certified_lower_bound(const Network& net, const InputPoint& x,
                                        double epsilon_max,
                                        const LowerBoundConfig& config = {});

}  // namespace relucert
