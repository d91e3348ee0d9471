#include "relucert/region.hpp"

#include <algorithm>
#include <cmath>

#include "relucert/kernels.hpp"

namespace relucert {

namespace {

void check_pattern(const Network& net, const ActivationPattern& pattern) {
  if (pattern.size() != net.total_hidden()) {
    throw InputError("pattern has " + std::to_string(pattern.size()) +
                     " bits, network has " + std::to_string(net.total_hidden()) +
                     " hidden neurons");
  }
}

std::size_t max_hidden_width(const Network& net) {
  std::size_t w = 1;
  for (std::size_t k = 0; k < net.hidden_layer_count(); ++k) {
    w = std::max(w, net.hidden_width(k));
  }
  return w;
}

// Composes the frozen affine maps layer by layer. Masked neurons simply drop
// out of the sums; that is bit-identical to multiplying their rows by zero.
// acc/next need capacity for the widest hidden layer, neuron_* for every
// hidden neuron, logit_* for the final layer.
void compose(const Network& net, const ActivationPattern& pattern, Matrix& acc_w,
             Vector& acc_b, Matrix& next_w, Vector& next_b, Matrix& neuron_w,
             Vector& neuron_b, Matrix& logit_w, Vector& logit_b) {
  const std::size_t m = net.input_dim();
  const std::size_t last = net.layer_count() - 1;
  std::size_t prev_rows = 0;
  for (std::size_t k = 0; k <= last; ++k) {
    const LinearLayer& l = net.layer(k);
    const std::size_t rows = l.weights.rows;
    Matrix& dst_w = (k == last) ? logit_w : next_w;
    Vector& dst_b = (k == last) ? logit_b : next_b;
    if (k == 0) {
      std::copy(l.weights.data.begin(), l.weights.data.end(), dst_w.data.begin());
      std::copy(l.bias.begin(), l.bias.end(), dst_b.begin());
    } else {
      const std::size_t off_prev = net.neuron_offset(k - 1);
      for (std::size_t u = 0; u < rows; ++u) {
        double* row = dst_w.data.data() + u * m;
        std::fill(row, row + m, 0.0);
        double b = l.bias[u];
        for (std::size_t j = 0; j < prev_rows; ++j) {
          if (!pattern.bit(off_prev + j)) continue;
          const double w = l.weights.at(u, j);
          if (w == 0.0) continue;
          kernels::axpy(w, acc_w.data.data() + j * m, row, m);
          b += w * acc_b[j];
        }
        dst_b[u] = b;
      }
    }
    if (k != last) {
      const std::size_t off = net.neuron_offset(k);
      std::copy(dst_w.data.begin(),
                dst_w.data.begin() + static_cast<std::ptrdiff_t>(rows * m),
                neuron_w.data.begin() + static_cast<std::ptrdiff_t>(off * m));
      std::copy(dst_b.begin(), dst_b.begin() + static_cast<std::ptrdiff_t>(rows),
                neuron_b.begin() + static_cast<std::ptrdiff_t>(off));
      acc_w.data.swap(next_w.data);
      acc_b.swap(next_b);
      prev_rows = rows;
    }
  }
}

double row_norm(const double* p, std::size_t n) {
  return std::sqrt(kernels::dot(p, p, n));
}

void fill_activation(Constraint& c, const double* w, double b, bool bit,
                     std::size_t m, std::size_t neuron,
                     std::shared_ptr<const ActivationPattern> src) {
  c.normal.resize(m);
  // Inside the region the neuron keeps its sign, so a true bit flips the
  // emitted half-space to -w * x - b <= 0.
  if (bit) {
    for (std::size_t i = 0; i < m; ++i) c.normal[i] = -w[i];
    c.offset = -b;
  } else {
    std::copy(w, w + m, c.normal.begin());
    c.offset = b;
  }
  c.norm = row_norm(c.normal.data(), m);
  c.kind = ConstraintKind::kActivation;
  c.index = neuron;
  c.source_pattern = std::move(src);
}

void fill_decision(Constraint& c, const double* row_j, const double* row_i,
                   double b_j, double b_i, std::size_t m, std::size_t competitor,
                   std::shared_ptr<const ActivationPattern> src) {
  c.normal.resize(m);
  for (std::size_t i = 0; i < m; ++i) c.normal[i] = row_j[i] - row_i[i];
  c.offset = b_j - b_i;
  c.norm = row_norm(c.normal.data(), m);
  c.kind = ConstraintKind::kDecision;
  c.index = competitor;
  c.source_pattern = std::move(src);
}

}  // namespace

RegionAffineMap region_affine_map(const Network& net, const ActivationPattern& pattern) {
  check_pattern(net, pattern);
  const std::size_t m = net.input_dim();
  const std::size_t cap = max_hidden_width(net);
  RegionAffineMap map;
  map.logit_weights = Matrix(net.num_classes(), m);
  map.logit_bias.resize(net.num_classes());
  map.neuron_weights = Matrix(net.total_hidden(), m);
  map.neuron_bias.resize(net.total_hidden());
  Matrix acc_w(cap, m), next_w(cap, m);
  Vector acc_b(cap), next_b(cap);
  compose(net, pattern, acc_w, acc_b, next_w, next_b, map.neuron_weights,
          map.neuron_bias, map.logit_weights, map.logit_bias);
  return map;
}

std::vector<Constraint> activation_constraints(const Network& net,
                                               const ActivationPattern& pattern) {
  check_pattern(net, pattern);
  const RegionAffineMap map = region_affine_map(net, pattern);
  auto src = std::make_shared<const ActivationPattern>(pattern);
  const std::size_t m = net.input_dim();
  std::vector<Constraint> out(net.total_hidden());
  for (std::size_t u = 0; u < net.total_hidden(); ++u) {
    fill_activation(out[u], map.neuron_weights.row(u), map.neuron_bias[u],
                    pattern.bit(u), m, u, src);
  }
  return out;
}

std::vector<Constraint> decision_constraints(const Network& net,
                                             const ActivationPattern& pattern,
                                             Label label) {
  check_pattern(net, pattern);
  if (label < 0 || static_cast<std::size_t>(label) >= net.num_classes()) {
    throw InputError("label " + std::to_string(label) + " out of range");
  }
  const RegionAffineMap map = region_affine_map(net, pattern);
  auto src = std::make_shared<const ActivationPattern>(pattern);
  const std::size_t m = net.input_dim();
  const std::size_t i = static_cast<std::size_t>(label);
  std::vector<Constraint> out(net.num_classes() - 1);
  std::size_t slot = 0;
  for (std::size_t j = 0; j < net.num_classes(); ++j) {
    if (j == i) continue;
    fill_decision(out[slot++], map.logit_weights.row(j), map.logit_weights.row(i),
                  map.logit_bias[j], map.logit_bias[i], m, j, src);
  }
  return out;
}

std::vector<Constraint> region_constraints(const Network& net,
                                           const ActivationPattern& pattern,
                                           Label label) {
  RegionWorkspace ws(net);
  std::vector<Constraint> out;
  ws.region_constraints(pattern, label, &out);
  return out;
}

ActivationPattern flip(const ActivationPattern& pattern, std::size_t u) {
  if (u >= pattern.size()) {
    throw InputError("flip: neuron " + std::to_string(u) + " out of range");
  }
  ActivationPattern p = pattern;
  p.set(u, !p.bit(u));
  return p;
}

std::string pattern_key(const ActivationPattern& pattern) {
  std::string key(pattern.size(), '0');
  for (std::size_t u = 0; u < pattern.size(); ++u) {
    if (pattern.bit(u)) key[u] = '1';
  }
  return key;
}

ActivationPattern pattern_from_key(const std::string& key) {
  ActivationPattern p(key.size());
  for (std::size_t u = 0; u < key.size(); ++u) {
    if (key[u] != '0' && key[u] != '1') {
      throw InputError("pattern key may only contain '0' and '1'");
    }
    p.set(u, key[u] == '1');
  }
  return p;
}

RegionWorkspace::RegionWorkspace(const Network& net)
    : net_(net),
      acc_w_(max_hidden_width(net), net.input_dim()),
      acc_b_(max_hidden_width(net)),
      next_w_(max_hidden_width(net), net.input_dim()),
      next_b_(max_hidden_width(net)),
      neuron_w_(std::max<std::size_t>(net.total_hidden(), 1), net.input_dim()),
      neuron_b_(std::max<std::size_t>(net.total_hidden(), 1)),
      logit_w_(net.num_classes(), net.input_dim()),
      logit_b_(net.num_classes()) {}

void RegionWorkspace::region_constraints(const ActivationPattern& pattern,
                                         Label label, std::vector<Constraint>* out) {
  check_pattern(net_, pattern);
  if (label < 0 || static_cast<std::size_t>(label) >= net_.num_classes()) {
    throw InputError("label " + std::to_string(label) + " out of range");
  }
  compose(net_, pattern, acc_w_, acc_b_, next_w_, next_b_, neuron_w_, neuron_b_,
          logit_w_, logit_b_);
  auto src = std::make_shared<const ActivationPattern>(pattern);
  const std::size_t m = net_.input_dim();
  const std::size_t i = static_cast<std::size_t>(label);
  // Slots are overwritten rather than rebuilt so a reused `out` keeps its
  // normal buffers across regions.
  const std::size_t total = net_.num_classes() - 1 + net_.total_hidden();
  if (out->size() != total) out->resize(total);
  std::size_t slot = 0;
  for (std::size_t j = 0; j < net_.num_classes(); ++j) {
    if (j == i) continue;
    fill_decision((*out)[slot++], logit_w_.row(j), logit_w_.row(i), logit_b_[j],
                  logit_b_[i], m, j, src);
  }
  for (std::size_t u = 0; u < net_.total_hidden(); ++u) {
    fill_activation((*out)[slot++], neuron_w_.row(u), neuron_b_[u], pattern.bit(u),
                    m, u, src);
  }
}

}  // namespace relucert
