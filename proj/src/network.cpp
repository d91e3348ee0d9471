#include "relucert/network.hpp"

#include <algorithm>
#include <limits>

#include "relucert/kernels.hpp"

namespace relucert {

Network::Network(std::vector<LinearLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw InputError("network needs at least one layer");
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const LinearLayer& l = layers_[k];
    if (l.weights.rows == 0 || l.weights.cols == 0) {
      throw InputError("layer " + std::to_string(k) + " has an empty weight matrix");
    }
    if (l.weights.rows != l.bias.size()) {
      throw InputError("layer " + std::to_string(k) + " bias length " +
                       std::to_string(l.bias.size()) + " does not match " +
                       std::to_string(l.weights.rows) + " output rows");
    }
    if (k > 0 && l.weights.cols != layers_[k - 1].weights.rows) {
      throw InputError("layer " + std::to_string(k) + " expects " +
                       std::to_string(l.weights.cols) + " inputs but layer " +
                       std::to_string(k - 1) + " emits " +
                       std::to_string(layers_[k - 1].weights.rows));
    }
    if (!all_finite(l.weights.data.data(), l.weights.data.size()) ||
        !all_finite(l.bias)) {
      throw InputError("layer " + std::to_string(k) + " contains non-finite entries");
    }
  }
  input_dim_ = layers_.front().weights.cols;
  num_classes_ = layers_.back().weights.rows;
  if (num_classes_ < 2) throw InputError("final layer must emit at least 2 classes");
  total_hidden_ = 0;
  offsets_.reserve(hidden_layer_count());
  for (std::size_t k = 0; k + 1 < layers_.size(); ++k) {
    offsets_.push_back(total_hidden_);
    total_hidden_ += layers_[k].weights.rows;
  }
}

std::size_t Network::neuron_layer(std::size_t u) const {
  if (u >= total_hidden_) throw InputError("neuron id out of range");
  std::size_t k = 0;
  while (k + 1 < offsets_.size() && offsets_[k + 1] <= u) ++k;
  return k;
}

ActivationPattern::ActivationPattern(std::vector<bool> bits) : bits_(bits.size()) {
  for (std::size_t i = 0; i < bits.size(); ++i) bits_[i] = bits[i] ? 1 : 0;
}

namespace {

void check_input(const Network& net, const InputPoint& x) {
  if (x.size() != net.input_dim()) {
    throw InputError("input has " + std::to_string(x.size()) +
                     " entries, network expects " + std::to_string(net.input_dim()));
  }
  if (!all_finite(x)) throw InputError("input contains non-finite entries");
}

// Shared pass: runs the network, optionally recording pre-activations.
Vector run(const Network& net, const InputPoint& x, Vector* preacts) {
  Vector cur = x;
  Vector next;
  if (preacts) preacts->resize(net.total_hidden());
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    const LinearLayer& l = net.layer(k);
    next.resize(l.weights.rows);
    kernels::matvec(l.weights.data.data(), l.bias.data(), cur.data(),
                    next.data(), l.weights.rows, l.weights.cols);
    if (k + 1 < net.layer_count()) {
      if (preacts) {
        std::copy(next.begin(), next.end(),
                  preacts->begin() + static_cast<std::ptrdiff_t>(net.neuron_offset(k)));
      }
      for (double& v : next) v = std::max(v, 0.0);
    }
    cur.swap(next);
  }
  return cur;
}

}  // namespace

Vector forward(const Network& net, const InputPoint& x) {
  check_input(net, x);
  return run(net, x, nullptr);
}

Vector pre_activations(const Network& net, const InputPoint& x) {
  check_input(net, x);
  Vector pre;
  run(net, x, &pre);
  return pre;
}

ActivationPattern activation_pattern(const Network& net, const InputPoint& x) {
  Vector pre = pre_activations(net, x);
  ActivationPattern p(pre.size());
  for (std::size_t u = 0; u < pre.size(); ++u) p.set(u, pre[u] >= 0.0);
  return p;
}

Classification classify_full(const Network& net, const InputPoint& x) {
  Classification c;
  c.logits = forward(net, x);
  c.label = 0;
  for (std::size_t j = 1; j < c.logits.size(); ++j) {
    if (c.logits[j] > c.logits[c.label]) c.label = static_cast<int>(j);
  }
  double runner_up = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < c.logits.size(); ++j) {
    if (static_cast<int>(j) == c.label) continue;
    runner_up = std::max(runner_up, c.logits[j]);
  }
  c.on_decision_boundary =
      c.logits[static_cast<std::size_t>(c.label)] - runner_up <= kTieTolerance;
  return c;
}

Label classify(const Network& net, const InputPoint& x) {
  return classify_full(net, x).label;
}

bool on_decision_boundary(const Network& net, const InputPoint& x) {
  return classify_full(net, x).on_decision_boundary;
}

}  // namespace relucert
