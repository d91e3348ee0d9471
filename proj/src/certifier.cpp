#include "relucert/certifier.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <thread>
#include <unordered_set>

#include "relucert/kernels.hpp"
#include "relucert/projection.hpp"
#include "relucert/qp_solver.hpp"

namespace relucert {

namespace {

using Clock = std::chrono::steady_clock;

struct QueueItem {
  Constraint c;
  double distance;
};

double l2_distance(const Vector& a, const Vector& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

void validate_config(const CertifyConfig& config) {
  if (!(config.epsilon > 0.0) || !std::isfinite(config.epsilon)) {
    throw InputError("epsilon must be positive and finite");
  }
}

// Search driver shared by batch sizes. Owns the two FIFO lanes (boundary
// entries are always dequeued before activation entries) and the visited set.
class Search {
 public:
  Search(const Network& net, const InputPoint& x, const CertifyConfig& config)
      : net_(net), x_(x), config_(config), ws_(net) {
    if (config.shuffle_seed) rng_.emplace(*config.shuffle_seed);
  }

  CertificationResult run() {
    const Clock::time_point t0 = Clock::now();
    CertificationResult res;
    const Classification cls = classify_full(net_, x_);
    label_ = cls.label;

    const ActivationPattern start = activation_pattern(net_, x_);
    visited_.insert(pattern_key(start));
    res.stats.regions_visited = 1;
    expand_and_enqueue(start, res.stats);

    while (!boundary_.empty() || !activation_.empty()) {
      if (config_.timeout && Clock::now() - t0 >= *config_.timeout) {
        return finish(res, CertifyStatus::kTimeout, t0);
      }
      if (!boundary_.empty()) {
        QueueItem item = std::move(boundary_.front());
        boundary_.pop_front();
        if (process_boundary(item, res)) return finish(res, res.status, t0);
        continue;
      }
      const std::size_t take =
          std::min(std::max<std::size_t>(config_.batch_size, 1), activation_.size());
      batch_.clear();
      for (std::size_t i = 0; i < take; ++i) {
        batch_.push_back(std::move(activation_.front()));
        activation_.pop_front();
      }
      for (const QueueItem& item : batch_) {
        const ActivationPattern neighbor =
            flip(*item.c.source_pattern, item.c.index);
        std::string key = pattern_key(neighbor);
        if (visited_.count(key)) continue;  // duplicate suppressed at dequeue
        if (config_.max_regions &&
            res.stats.regions_visited >= *config_.max_regions) {
          return finish(res, CertifyStatus::kTimeout, t0);
        }
        visited_.insert(std::move(key));
        res.stats.regions_visited += 1;
        expand_and_enqueue(neighbor, res.stats);
      }
    }

    if (pending_ > 0) {
      res.pending_boundaries = pending_;
      res.nearest_ambiguous_distance = nearest_ambiguous_;
      return finish(res, CertifyStatus::kUnknown, t0);
    }
    return finish(res, CertifyStatus::kRobust, t0);
  }

 private:
  CertificationResult finish(CertificationResult& res, CertifyStatus status,
                             Clock::time_point t0) {
    res.status = status;
    if (status == CertifyStatus::kUnknown) {
      res.pending_boundaries = pending_;
      res.nearest_ambiguous_distance = nearest_ambiguous_;
    }
    res.stats.elapsed = Clock::now() - t0;
    return res;
  }

  // Generates the region's constraints, filters by distance and routes the
  // survivors into the two lanes. batch_size 1 goes through the plain
  // per-region entry point; larger batches reuse the workspace buffers so
  // repeated expansions stop paying per-region allocation.
  void expand_and_enqueue(const ActivationPattern& pattern, SearchStats& stats) {
    const std::size_t total = net_.num_classes() - 1 + net_.total_hidden();
    if (config_.batch_size <= 1) {
      auto survivors = expand_region(net_, pattern, x_, config_.epsilon, label_);
      stats.constraints_filtered += total - survivors.size();
      route(std::move(survivors), stats);
      return;
    }
    ws_.region_constraints(pattern, label_, &scratch_);
    const std::vector<double> dist = batch_distances(x_, scratch_);
    std::vector<std::pair<Constraint, double>> survivors;
    survivors.reserve(scratch_.size());
    for (std::size_t i = 0; i < scratch_.size(); ++i) {
      if (dist[i] <= config_.epsilon && std::isfinite(dist[i])) {
        survivors.emplace_back(std::move(scratch_[i]), dist[i]);
      } else {
        stats.constraints_filtered += 1;
      }
    }
    route(std::move(survivors), stats);
  }

  void route(std::vector<std::pair<Constraint, double>>&& survivors,
             SearchStats& stats) {
    if (rng_) std::shuffle(survivors.begin(), survivors.end(), *rng_);
    for (auto& [c, d] : survivors) {
      stats.constraints_enqueued += 1;
      auto& lane = (c.kind == ConstraintKind::kDecision) ? boundary_ : activation_;
      lane.push_back(QueueItem{std::move(c), d});
    }
  }

  // Returns true when the search is over (res.status set). A false return
  // means the boundary was conclusively ruled out and the search goes on.
  bool process_boundary(const QueueItem& item, CertificationResult& res) {
    res.stats.boundary_projections += 1;
    const ProjectionResult pr = project(x_, item.c);
    if (pr.point) {
      const Classification pc = classify_full(net_, *pr.point);
      if (pc.label != label_ || pc.on_decision_boundary) {
        res.status = CertifyStatus::kNotRobust;
        res.witness = *pr.point;
        res.witness_distance = l2_distance(x_, *pr.point);
        return true;
      }
    }
    // Projection inconclusive: same class off the feasible part, or no
    // projection at all (degenerate boundary).
    if (config_.exact_fallback) {
      res.stats.solver_calls += 1;
      RegionProblem prob;
      prob.x = x_;
      prob.inequalities = activation_constraints(net_, *item.c.source_pattern);
      if (!item.c.degenerate()) prob.equality = item.c;
      const SolverOutcome so = min_distance_on_boundary(prob);
      if (so.status == SolverStatus::kInfeasible) return false;
      if (so.status == SolverStatus::kFeasible) {
        if (so.distance > config_.epsilon) return false;
        Vector w = so.witness;
        if (prob.equality) {
          // Snap exactly onto the boundary hyperplane so the tie predicate
          // sees a machine-precision logit tie.
          const Constraint& e = *prob.equality;
          const double v =
              kernels::dot(e.normal.data(), w.data(), w.size()) + e.offset;
          kernels::axpy(-v / (e.norm * e.norm), e.normal.data(), w.data(), w.size());
        }
        const Classification wc = classify_full(net_, w);
        if (wc.label != label_ || wc.on_decision_boundary) {
          res.status = CertifyStatus::kNotRobust;
          res.witness = std::move(w);
          res.witness_distance = l2_distance(x_, *res.witness);
          return true;
        }
      }
      // NotConverged, or a witness that failed verification: ambiguous.
    }
    pending_ += 1;
    nearest_ambiguous_ = std::min(nearest_ambiguous_, item.distance);
    if (!config_.full_queue) {
      res.status = CertifyStatus::kUnknown;
      return true;
    }
    return false;
  }

  const Network& net_;
  const InputPoint& x_;
  const CertifyConfig& config_;
  RegionWorkspace ws_;
  std::vector<Constraint> scratch_;
  std::deque<QueueItem> boundary_;
  std::deque<QueueItem> activation_;
  std::vector<QueueItem> batch_;
  std::unordered_set<std::string> visited_;
  std::optional<std::mt19937_64> rng_;
  Label label_ = 0;
  std::size_t pending_ = 0;
  double nearest_ambiguous_ = std::numeric_limits<double>::infinity();
};

}  // namespace

std::vector<std::pair<Constraint, double>> expand_region(
    const Network& net, const ActivationPattern& pattern, const InputPoint& x,
    double epsilon, Label label) {
  if (!(epsilon >= 0.0)) throw InputError("epsilon must be nonnegative");
  std::vector<Constraint> cons = region_constraints(net, pattern, label);
  const std::vector<double> dist = batch_distances(x, cons);
  std::vector<std::pair<Constraint, double>> out;
  out.reserve(cons.size());
  for (std::size_t i = 0; i < cons.size(); ++i) {
    if (dist[i] <= epsilon && std::isfinite(dist[i])) {
      out.emplace_back(std::move(cons[i]), dist[i]);
    }
  }
  return out;
}

CertificationResult certify(const Network& net, const InputPoint& x,
                            const CertifyConfig& config) {
  validate_config(config);
  Search search(net, x, config);
  return search.run();
}

std::vector<BatchEntry> certify_batch(
    const Network& net, const std::vector<std::pair<InputPoint, double>>& instances,
    const CertifyConfig& config, std::size_t jobs) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, std::max<std::size_t>(instances.size(), 1));
  std::vector<BatchEntry> out(instances.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= instances.size()) return;
      try {
        CertifyConfig local = config;
        local.epsilon = instances[i].second;
        out[i].result = certify(net, instances[i].first, local);
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return out;
}

}  // namespace relucert
