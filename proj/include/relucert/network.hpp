#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relucert/types.hpp"

namespace relucert {

// Top-two logits within this absolute gap count as a decision-boundary tie.
inline constexpr double kTieTolerance = 1e-9;

struct LinearLayer {
  Matrix weights;  // out x in, row-major
  Vector bias;     // out
};

// Feed-forward ReLU classifier: every layer but the last is followed by a
// ReLU; the last layer emits logits. A network with a single layer is a plain
// affine classifier with no hidden neurons.
class Network {
 public:
  explicit Network(std::vector<LinearLayer> layers);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t num_classes() const { return num_classes_; }
  std::size_t layer_count() const { return layers_.size(); }
  const LinearLayer& layer(std::size_t k) const { return layers_[k]; }

  std::size_t hidden_layer_count() const { return layers_.size() - 1; }
  std::size_t hidden_width(std::size_t k) const { return layers_[k].bias.size(); }
  // Total hidden neuron count; also the activation pattern length.
  std::size_t total_hidden() const { return total_hidden_; }

  // Hidden neurons are numbered layer-major, ascending within a layer.
  std::size_t neuron_layer(std::size_t u) const;
  std::size_t neuron_offset(std::size_t layer) const { return offsets_[layer]; }

 private:
  std::vector<LinearLayer> layers_;
  std::vector<std::size_t> offsets_;  // first neuron id of each hidden layer
  std::size_t input_dim_;
  std::size_t num_classes_;
  std::size_t total_hidden_;
};

// One ReLU sign per hidden neuron, layer-major. Bit true means the neuron's
// pre-activation is >= 0 (boundary points map to true, no tolerance).
class ActivationPattern {
 public:
  ActivationPattern() = default;
  explicit ActivationPattern(std::size_t n) : bits_(n, 0) {}
  explicit ActivationPattern(std::vector<bool> bits);

  std::size_t size() const { return bits_.size(); }
  bool bit(std::size_t u) const { return bits_[u] != 0; }
  void set(std::size_t u, bool v) { bits_[u] = v ? 1 : 0; }

  bool operator==(const ActivationPattern& o) const { return bits_ == o.bits_; }
  bool operator!=(const ActivationPattern& o) const { return !(*this == o); }

 private:
  std::vector<std::uint8_t> bits_;
};

struct Classification {
  Label label = 0;
  bool on_decision_boundary = false;
  Vector logits;
};

Vector forward(const Network& net, const InputPoint& x);

// Pre-activation values of every hidden neuron, layer-major.
Vector pre_activations(const Network& net, const InputPoint& x);

ActivationPattern activation_pattern(const Network& net, const InputPoint& x);

// Argmax over logits, lowest index on ties. on_decision_boundary is true when
// the top two logits are within kTieTolerance.
Classification classify_full(const Network& net, const InputPoint& x);
Label classify(const Network& net, const InputPoint& x);
bool on_decision_boundary(const Network& net, const InputPoint& x);

}  // namespace relucert
