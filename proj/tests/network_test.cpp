#include <cmath>
#include <random>

#include "doctest.h"
#include "relucert/model_io.hpp"
#include "relucert/network.hpp"
#include "test_support.hpp"

using namespace relucert;
using namespace relucert::testing;

TEST_SUITE("network") {

TEST_CASE("identity-hidden example evaluates by hand") {
  const Network net = h1_network();
  const Vector logits = forward(net, {0.5, 0.2});
  REQUIRE(logits.size() == 2);
  CHECK(logits[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(logits[1] == doctest::Approx(-0.3).epsilon(1e-12));

  CHECK(classify(net, {0.5, 0.2}) == 0);

  const Vector pre = pre_activations(net, {0.5, 0.2});
  REQUIRE(pre.size() == 2);
  CHECK(pre[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pre[1] == doctest::Approx(0.2).epsilon(1e-12));

  const ActivationPattern p1 = activation_pattern(net, {0.5, 0.2});
  CHECK(p1.bit(0));
  CHECK(p1.bit(1));
  const ActivationPattern p2 = activation_pattern(net, {0.5, -0.1});
  CHECK(p2.bit(0));
  CHECK_FALSE(p2.bit(1));
}

TEST_CASE("boundary pre-activations count as active") {
  const Network net = h1_network();
  const ActivationPattern p = activation_pattern(net, {0.0, -0.3});
  CHECK(p.bit(0));  // pre-activation exactly 0
  CHECK_FALSE(p.bit(1));
}

TEST_CASE("forward agrees with a plain-loop interpreter on random nets") {
  std::mt19937_64 rng(21);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    FixtureSpec spec;
    spec.input_dim = 3;
    spec.hidden = {4, 3};
    spec.num_classes = 3;
    spec.seed = seed;
    const Network net = generate_fixture(spec);
    for (int t = 0; t < 10; ++t) {
      const Vector x = random_point(rng, 3, -2.0, 2.0);
      const Vector got = forward(net, x);
      const Vector want = naive_forward(net, x);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("argmax is invariant to positive logit scaling") {
  std::mt19937_64 rng(22);
  FixtureSpec spec;
  spec.input_dim = 2;
  spec.hidden = {4};
  spec.num_classes = 3;
  spec.seed = 5;
  const Network base = generate_fixture(spec);

  // Same network with the output layer scaled by 10: decisions must agree.
  std::vector<LinearLayer> layers;
  for (std::size_t k = 0; k < base.layer_count(); ++k) layers.push_back(base.layer(k));
  for (double& w : layers.back().weights.data) w *= 10.0;
  for (double& b : layers.back().bias) b *= 10.0;
  const Network scaled = Network(std::move(layers));

  for (int t = 0; t < 200; ++t) {
    const Vector x = random_point(rng, 2, -2.0, 2.0);
    CHECK(classify(base, x) == classify(scaled, x));
  }
}

TEST_CASE("ties within tolerance are flagged as boundary points") {
  const Network net = h1_network();
  const Classification on = classify_full(net, {0.4, 0.4});
  CHECK(on.on_decision_boundary);
  CHECK(on.label == 0);  // ties resolve to the lowest class index
  const Classification off = classify_full(net, {0.5, 0.2});
  CHECK_FALSE(off.on_decision_boundary);
}

TEST_CASE("construction rejects malformed networks with the layer index") {
  LinearLayer a;
  a.weights = Matrix(2, 2);
  a.bias = {0.0, 0.0};
  LinearLayer b;
  b.weights = Matrix(2, 3);  // expects 3 inputs, previous layer emits 2
  b.bias = {0.0, 0.0};
  CHECK_THROWS_WITH_AS(Network({a, b}), doctest::Contains("layer 1"), InputError);

  LinearLayer bad_bias = a;
  bad_bias.bias = {0.0};
  CHECK_THROWS_AS(Network({bad_bias, a}), InputError);

  LinearLayer nan_layer = a;
  nan_layer.weights.at(0, 0) = std::nan("");
  CHECK_THROWS_AS(Network({nan_layer, a}), InputError);

  LinearLayer one_class;
  one_class.weights = Matrix(1, 2);
  one_class.bias = {0.0};
  CHECK_THROWS_AS(Network({a, one_class}), InputError);
}

TEST_CASE("queries reject wrong dimensions and non-finite entries") {
  const Network net = h1_network();
  CHECK_THROWS_AS(forward(net, {1.0}), InputError);
  CHECK_THROWS_AS(classify(net, {1.0, 2.0, 3.0}), InputError);
  CHECK_THROWS_AS(forward(net, {1.0, std::nan("")}), InputError);
}

TEST_CASE("neuron indexing walks layers in order") {
  FixtureSpec spec;
  spec.input_dim = 2;
  spec.hidden = {3, 2};
  spec.num_classes = 2;
  spec.seed = 1;
  const Network net = generate_fixture(spec);
  CHECK(net.total_hidden() == 5);
  CHECK(net.neuron_layer(0) == 0);
  CHECK(net.neuron_layer(2) == 0);
  CHECK(net.neuron_layer(3) == 1);
  CHECK(net.neuron_layer(4) == 1);
  CHECK(net.neuron_offset(0) == 0);
  CHECK(net.neuron_offset(1) == 3);
  CHECK_THROWS_AS(net.neuron_layer(5), InputError);
}

}  // TEST_SUITE
