#include "relucert/lower_bound.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "relucert/projection.hpp"
#include "relucert/region.hpp"

namespace relucert {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kInRegionSlack = 1e-9;

struct HeapItem {
  double distance;
  std::size_t seq;  // insertion order breaks distance ties, first in wins
  Constraint c;
};

struct HeapOrder {
  bool operator()(const HeapItem& a, const HeapItem& b) const {
    if (a.distance != b.distance) return a.distance > b.distance;
    return a.seq > b.seq;
  }
};

bool inside_region(const Network& net, const ActivationPattern& pattern,
                   const Vector& point) {
  for (const Constraint& c : activation_constraints(net, pattern)) {
    double v = c.offset;
    for (std::size_t i = 0; i < point.size(); ++i) v += c.normal[i] * point[i];
    if (v > kInRegionSlack) return false;
  }
  return true;
}

}  // namespace

LowerBoundOutcome certified_lower_bound(const Network& net, const InputPoint& x,
                                        double epsilon_max,
                                        const LowerBoundConfig& config) {
  if (!(epsilon_max > 0.0) || !std::isfinite(epsilon_max)) {
    throw InputError("epsilon_max must be positive and finite");
  }
  const Clock::time_point t0 = Clock::now();
  LowerBoundOutcome out;
  const Classification cls = classify_full(net, x);

  std::priority_queue<HeapItem, std::vector<HeapItem>, HeapOrder> queue;
  std::unordered_set<std::string> visited;
  std::size_t seq = 0;

  auto expand = [&](const ActivationPattern& pattern) {
    out.stats.regions_visited += 1;
    std::vector<Constraint> cons = region_constraints(net, pattern, cls.label);
    const std::vector<double> dist = batch_distances(x, cons);
    for (std::size_t i = 0; i < cons.size(); ++i) {
      if (dist[i] <= epsilon_max && std::isfinite(dist[i])) {
        out.stats.constraints_enqueued += 1;
        queue.push(HeapItem{dist[i], seq++, std::move(cons[i])});
      } else {
        out.stats.constraints_filtered += 1;
      }
    }
  };

  const ActivationPattern start = activation_pattern(net, x);
  visited.insert(pattern_key(start));
  expand(start);

  std::size_t iterations = 0;
  while (!queue.empty()) {
    if (config.timeout && Clock::now() - t0 >= *config.timeout) {
      out.status = LowerBoundStatus::kTimeout;
      out.stats.elapsed = Clock::now() - t0;
      return out;
    }
    if (config.max_iterations && iterations >= *config.max_iterations) {
      out.status = LowerBoundStatus::kTimeout;
      out.stats.elapsed = Clock::now() - t0;
      return out;
    }
    iterations += 1;

    // priority_queue::top is const, so the constraint gets copied out. Cheap
    // next to the per-pop region expansion work.
    HeapItem item = queue.top();
    queue.pop();
    out.bound = std::max(out.bound, item.distance);

    if (item.c.kind == ConstraintKind::kDecision) {
      // Every region closer than the bound has been explored and contained no
      // boundary, so the bound is certified. Check whether it is also exact.
      out.status = LowerBoundStatus::kStoppedAtBoundary;
      out.stats.boundary_projections += 1;
      const ProjectionResult pr = project(x, item.c);
      if (pr.point && inside_region(net, *item.c.source_pattern, *pr.point)) {
        const Classification pc = classify_full(net, *pr.point);
        if (pc.label != cls.label || pc.on_decision_boundary) {
          out.tight = true;
          out.witness = *pr.point;
        }
      }
      out.stats.elapsed = Clock::now() - t0;
      return out;
    }

    const ActivationPattern neighbor = flip(*item.c.source_pattern, item.c.index);
    std::string key = pattern_key(neighbor);
    if (visited.count(key)) continue;
    visited.insert(std::move(key));
    expand(neighbor);
  }

  // Every reachable constraint within epsilon_max was dequeued and none was a
  // decision boundary, so the full radius is certified.
  out.bound = epsilon_max;
  out.status = LowerBoundStatus::kExhaustedAtEpsilon;
  out.stats.elapsed = Clock::now() - t0;
  return out;
}

}  // namespace relucert
