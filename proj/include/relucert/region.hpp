#pragma once

#include <memory>
#include <string>
#include <vector>

#include "relucert/network.hpp"
#include "relucert/types.hpp"

namespace relucert {

// Normals with l2 norm at or below this are treated as degenerate.
inline constexpr double kDegenerateNormEta = 1e-12;

// Affine behaviour of the network with the ReLU signs frozen to a pattern:
// within the pattern's region every logit and every hidden pre-activation is
// exactly the affine function recorded here.
struct RegionAffineMap {
  Matrix logit_weights;   // num_classes x input_dim
  Vector logit_bias;      // num_classes
  Matrix neuron_weights;  // total_hidden x input_dim, layer-major rows
  Vector neuron_bias;     // total_hidden
};

enum class ConstraintKind { kActivation, kDecision };

// Closed half-space normal * x + offset <= 0. Activation constraints are
// oriented so their open side is the source region's side; decision
// constraints so it is the side where the source label keeps winning.
struct Constraint {
  Vector normal;
  double offset = 0.0;
  double norm = 0.0;  // cached l2 norm of normal
  ConstraintKind kind = ConstraintKind::kActivation;
  // Hidden neuron id for activation constraints, competitor class for
  // decision constraints.
  std::size_t index = 0;
  std::shared_ptr<const ActivationPattern> source_pattern;

  bool degenerate() const { return norm <= kDegenerateNormEta; }
};

RegionAffineMap region_affine_map(const Network& net, const ActivationPattern& pattern);

// One constraint per hidden neuron, in neuron order. Degenerate rows are kept
// (flagged via their cached norm) rather than dropped.
std::vector<Constraint> activation_constraints(const Network& net,
                                               const ActivationPattern& pattern);

// One constraint per competitor class j != label, ascending j.
std::vector<Constraint> decision_constraints(const Network& net,
                                             const ActivationPattern& pattern,
                                             Label label);

// Copy of the pattern with the sign of hidden neuron u negated.
ActivationPattern flip(const ActivationPattern& pattern, std::size_t u);

// Canonical fixed-width key: '0'/'1' per neuron, layer-major, neuron
// ascending. Injective, usable directly as a hash-set key.
std::string pattern_key(const ActivationPattern& pattern);
ActivationPattern pattern_from_key(const std::string& key);

// Reusable scratch for repeated constraint generation. Functionally identical
// to calling the free functions above; exists so the certifier's batched
// expansion can amortise buffer allocation across regions.
class RegionWorkspace {
 public:
  explicit RegionWorkspace(const Network& net);

  // Emits decision constraints (ascending competitor) followed by activation
  // constraints (ascending neuron) into `out`, replacing its contents.
  // Normals are materialised per constraint; shared buffers hold the
  // intermediate affine composition.
  void region_constraints(const ActivationPattern& pattern, Label label,
                          std::vector<Constraint>* out);

 private:
  const Network& net_;
  Matrix acc_w_;      // running composition, rows of the widest layer
  Vector acc_b_;
  Matrix next_w_;
  Vector next_b_;
  Matrix neuron_w_;   // pre-activation rows for every hidden neuron
  Vector neuron_b_;
  Matrix logit_w_;
  Vector logit_b_;
};

// Decision constraints then activation constraints, the order the search
// enqueues them in.
std::vector<Constraint> region_constraints(const Network& net,
                                           const ActivationPattern& pattern,
                                           Label label);

}  // namespace relucert
