#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relucert/network.hpp"
#include "relucert/types.hpp"

namespace relucert {

// Model files are JSON: {"format_version": 1, "input_dim": m, "layers":
// [{"weights": [[...], ...], "bias": [...], "activation": "relu"|"linear"}]}.
// Weights are row-major out x in. Hidden layers must be "relu", the output
// layer "linear". Doubles are written in shortest round-trip form, so
// save/load preserves every bit.
Network load_model(const std::string& path);
void save_model(const Network& net, const std::string& path);

// Inputs files are a JSON array of equal-length number arrays.
std::vector<InputPoint> load_inputs(const std::string& path);

struct FixtureSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden;  // widths, possibly empty
  std::size_t num_classes = 0;
  std::uint64_t seed = 0;
  double scale = 1.0;
};

// Parses "input_dim=2,hidden=4x4,num_classes=3,seed=7,scale=1.0". The hidden
// field may be empty ("hidden=") for a single affine layer; scale defaults
// to 1.
FixtureSpec parse_fixture_spec(const std::string& text);

// Deterministic network from the spec: weights and biases i.i.d. uniform in
// [-scale, scale], drawn in a fixed order (per layer, weights row-major, then
// bias). Same spec and seed give a bit-identical network on any platform.
Network generate_fixture(const FixtureSpec& spec);

}  // namespace relucert
