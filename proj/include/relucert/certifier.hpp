#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "relucert/network.hpp"
#include "relucert/region.hpp"
#include "relucert/types.hpp"

namespace relucert {

struct CertifyConfig {
  double epsilon = 0.0;
  // Record inconclusive boundaries and keep searching instead of stopping at
  // the first one.
  bool full_queue = false;
  // Resolve inconclusive boundaries exactly with the region solver.
  bool exact_fallback = false;
  // Activation constraints dequeued and expanded per batched step.
  std::size_t batch_size = 32;
  std::optional<std::chrono::milliseconds> timeout;
  std::optional<std::size_t> max_regions;
  // Diagnostics only: deterministically shuffles each region's enqueue order.
  // Exists so order-independence of soundness is testable; the CLI never
  // sets it.
  std::optional<std::uint64_t> shuffle_seed;
};

enum class CertifyStatus { kRobust, kNotRobust, kUnknown, kTimeout };

struct SearchStats {
  std::size_t regions_visited = 0;
  std::size_t constraints_enqueued = 0;
  std::size_t constraints_filtered = 0;
  std::size_t boundary_projections = 0;
  std::size_t solver_calls = 0;
  std::chrono::duration<double, std::milli> elapsed{0.0};
};

struct CertificationResult {
  CertifyStatus status = CertifyStatus::kUnknown;
  // Present iff status is kNotRobust: a point within epsilon (plus 1e-9
  // slack) that is misclassified or sits on the decision boundary.
  std::optional<Vector> witness;
  double witness_distance = 0.0;
  // For kUnknown: how many boundaries were left unresolved and how close the
  // nearest one was.
  std::size_t pending_boundaries = 0;
  double nearest_ambiguous_distance = 0.0;
  SearchStats stats;
};

// All constraints of the pattern's region whose hyperplane lies within
// epsilon of x: decision constraints first (ascending competitor), then
// activation constraints (ascending neuron), distances from one
// batch_distances pass.
std::vector<std::pair<Constraint, double>> expand_region(
    const Network& net, const ActivationPattern& pattern, const InputPoint& x,
    double epsilon, Label label);

// Breadth-first search over activation regions reachable through constraint
// hyperplanes within epsilon of x. Sound by construction: kRobust only after
// the reachable set is exhausted, kNotRobust only with a verified witness.
CertificationResult certify(const Network& net, const InputPoint& x,
                            const CertifyConfig& config);

struct BatchEntry {
  std::optional<CertificationResult> result;
  std::string error;  // non-empty when this slot failed validation
};

// Elementwise certify over (point, epsilon) instances; config supplies
// everything except the radius. jobs = 0 means one worker per hardware
// thread. Results are positionally aligned with the instances.
std::vector<BatchEntry> certify_batch(
    const Network& net, const std::vector<std::pair<InputPoint, double>>& instances,
    const CertifyConfig& config, std::size_t jobs = 0);

}  // namespace relucert
