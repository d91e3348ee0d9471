#include "relucert/oracle.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "relucert/qp_solver.hpp"

namespace relucert {

namespace {

void check_capacity(const Network& net) {
  if (net.total_hidden() > kOracleMaxNeurons) {
    throw CapacityError("network has " + std::to_string(net.total_hidden()) +
                        " hidden neurons; the oracle enumerates at most " +
                        std::to_string(kOracleMaxNeurons));
  }
}

// Depth-first walk over bit assignments in flat neuron order (false branch
// first, so leaves arrive in ascending pattern_key order). Unassigned bits
// stay false; only the first `assigned` constraint rows are meaningful, which
// is sound because a neuron's frozen form ignores its own and later layers.
void enumerate(const Network& net, ActivationPattern& pattern,
               std::size_t assigned, RegionCatalog& catalog) {
  const std::size_t total = net.total_hidden();
  if (assigned == total) {
    const FeasibilityOutcome fo =
        feasibility(activation_constraints(net, pattern), net.input_dim());
    if (fo.status == SolverStatus::kInfeasible) return;
    if (fo.status == SolverStatus::kNotConverged) {
      catalog.unresolved += 1;
      return;
    }
    catalog.entries.push_back(
        CatalogEntry{pattern, fo.witness, region_affine_map(net, pattern)});
    return;
  }
  for (const bool value : {false, true}) {
    pattern.set(assigned, value);
    std::vector<Constraint> prefix = activation_constraints(net, pattern);
    prefix.resize(assigned + 1);
    // Only certified infeasibility prunes; an unconverged solve recurses so
    // no feasible completion can be lost.
    if (feasibility_any(prefix, net.input_dim()).status != SolverStatus::kInfeasible) {
      enumerate(net, pattern, assigned + 1, catalog);
    }
  }
  pattern.set(assigned, false);
}

}  // namespace

RegionCatalog enumerate_feasible_patterns(const Network& net) {
  check_capacity(net);
  RegionCatalog catalog;
  ActivationPattern pattern(net.total_hidden());
  enumerate(net, pattern, 0, catalog);
  return catalog;
}

MinDistortion exact_min_distortion(const Network& net, const InputPoint& x) {
  check_capacity(net);
  if (x.size() != net.input_dim()) {
    throw InputError("input dimension mismatch");
  }
  const Label label = classify(net, x);
  const RegionCatalog catalog = enumerate_feasible_patterns(net);

  MinDistortion best;
  best.distance = std::numeric_limits<double>::infinity();
  best.unresolved = catalog.unresolved;

  for (const CatalogEntry& entry : catalog.entries) {
    RegionProblem problem;
    problem.x = x;
    problem.inequalities = activation_constraints(net, entry.pattern);

    // Reused across degenerate competitors: distance from x to the region.
    std::optional<SolverOutcome> to_region;

    for (const Constraint& c : decision_constraints(net, entry.pattern, label)) {
      SolverOutcome so;
      if (c.degenerate()) {
        // The competitor's logit differs from the predicted one by the fixed
        // amount c.offset throughout this region. Non-negative offset makes
        // every region point tied or misclassified, so the whole region is a
        // candidate; negative offset means this competitor never catches up
        // here.
        if (c.offset < -kTieTolerance) continue;
        if (!to_region) {
          RegionProblem region_only = problem;
          region_only.equality.reset();
          to_region = min_distance_on_boundary(region_only);
        }
        so = *to_region;
      } else {
        problem.equality = c;
        so = min_distance_on_boundary(problem);
      }
      if (so.status == SolverStatus::kNotConverged) {
        best.unresolved += 1;
        continue;
      }
      if (so.status == SolverStatus::kFeasible && so.distance < best.distance) {
        best.distance = so.distance;
        best.witness = so.witness;
      }
    }
  }
  return best;
}

bool robust_oracle(const Network& net, const InputPoint& x, double epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw InputError("epsilon must be nonnegative and finite");
  }
  return exact_min_distortion(net, x).distance > epsilon;
}

}  // namespace relucert
