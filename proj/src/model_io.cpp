#include "relucert/model_io.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace relucert {

namespace {

using nlohmann::json;

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return doc;
}

const json& require(const json& doc, const char* field, const std::string& where) {
  auto it = doc.find(field);
  if (it == doc.end()) {
    throw ParseError(where + ": missing field \"" + field + "\"");
  }
  return *it;
}

double require_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(where + ": non-finite value");
  return d;
}

// Uniform double in [-scale, scale] from raw generator bits. Avoids
// std::uniform_real_distribution, whose output is not pinned down by the
// standard and differs across library implementations.
double uniform_signed(std::mt19937_64& rng, double scale) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
  return scale * (2.0 * u - 1.0);
}

}  // namespace

Network load_model(const std::string& path) {
  const json doc = parse_file(path);
  if (!doc.is_object()) throw ParseError(path + ": top level must be an object");
  const json& version = require(doc, "format_version", path);
  if (!version.is_number_integer() || version.get<int>() != 1) {
    throw ParseError(path + ": unsupported format_version");
  }
  const json& dim = require(doc, "input_dim", path);
  if (!dim.is_number_integer() || dim.get<int>() < 1) {
    throw ParseError(path + ": input_dim must be a positive integer");
  }
  const json& layers = require(doc, "layers", path);
  if (!layers.is_array() || layers.empty()) {
    throw ParseError(path + ": layers must be a non-empty array");
  }

  std::vector<LinearLayer> built;
  built.reserve(layers.size());
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const std::string where = path + ": layer " + std::to_string(k);
    const json& layer = layers[k];
    if (!layer.is_object()) throw ParseError(where + ": expected an object");

    const json& activation = require(layer, "activation", where);
    const bool last = (k + 1 == layers.size());
    const std::string expected = last ? "linear" : "relu";
    if (!activation.is_string() || activation.get<std::string>() != expected) {
      throw ParseError(where + ": activation must be \"" + expected + "\"");
    }

    const json& weights = require(layer, "weights", where);
    const json& bias = require(layer, "bias", where);
    if (!weights.is_array() || weights.empty()) {
      throw ParseError(where + ": weights must be a non-empty 2-D array");
    }
    if (!bias.is_array()) throw ParseError(where + ": bias must be an array");

    LinearLayer out;
    out.weights.rows = weights.size();
    out.weights.cols = weights[0].is_array() ? weights[0].size() : 0;
    if (out.weights.cols == 0) {
      throw ParseError(where + ": weights rows must be non-empty arrays");
    }
    out.weights.data.reserve(out.weights.rows * out.weights.cols);
    for (std::size_t r = 0; r < out.weights.rows; ++r) {
      const json& row = weights[r];
      if (!row.is_array() || row.size() != out.weights.cols) {
        throw ParseError(where + ": weights row " + std::to_string(r) +
                         " has inconsistent length");
      }
      for (std::size_t c = 0; c < out.weights.cols; ++c) {
        out.weights.data.push_back(
            require_number(row[c], where + " weights[" + std::to_string(r) +
                                       "][" + std::to_string(c) + "]"));
      }
    }
    if (bias.size() != out.weights.rows) {
      throw ParseError(where + ": bias length " + std::to_string(bias.size()) +
                       " does not match " + std::to_string(out.weights.rows) +
                       " output rows");
    }
    out.bias.reserve(bias.size());
    for (std::size_t i = 0; i < bias.size(); ++i) {
      out.bias.push_back(require_number(bias[i], where + " bias[" + std::to_string(i) + "]"));
    }
    built.push_back(std::move(out));
  }

  if (built.front().weights.cols != static_cast<std::size_t>(dim.get<int>())) {
    throw ParseError(path + ": layer 0 expects " +
                     std::to_string(built.front().weights.cols) +
                     " inputs but input_dim is " + std::to_string(dim.get<int>()));
  }
  return Network(std::move(built));  // composition re-checked here
}

void save_model(const Network& net, const std::string& path) {
  json layers = json::array();
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    const LinearLayer& layer = net.layer(k);
    json weights = json::array();
    for (std::size_t r = 0; r < layer.weights.rows; ++r) {
      json row = json::array();
      for (std::size_t c = 0; c < layer.weights.cols; ++c) {
        row.push_back(layer.weights.at(r, c));
      }
      weights.push_back(std::move(row));
    }
    layers.push_back({{"weights", std::move(weights)},
                      {"bias", layer.bias},
                      {"activation", k + 1 == net.layer_count() ? "linear" : "relu"}});
  }
  const json doc = {{"format_version", 1},
                    {"input_dim", net.input_dim()},
                    {"layers", std::move(layers)}};
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw ParseError("write to " + path + " failed");
}

std::vector<InputPoint> load_inputs(const std::string& path) {
  const json doc = parse_file(path);
  if (!doc.is_array()) {
    throw ParseError(path + ": top level must be an array of vectors");
  }
  std::vector<InputPoint> points;
  points.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string where = path + ": input " + std::to_string(i);
    const json& row = doc[i];
    if (!row.is_array() || row.empty()) {
      throw ParseError(where + ": expected a non-empty number array");
    }
    InputPoint p;
    p.reserve(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
      p.push_back(require_number(row[j], where + "[" + std::to_string(j) + "]"));
    }
    if (!points.empty() && p.size() != points.front().size()) {
      throw ParseError(where + ": length differs from input 0");
    }
    points.push_back(std::move(p));
  }
  return points;
}

FixtureSpec parse_fixture_spec(const std::string& text) {
  FixtureSpec spec;
  bool saw_dim = false, saw_hidden = false, saw_classes = false, saw_seed = false;
  std::istringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos) {
      throw ParseError("fixture spec entry \"" + item + "\" is not key=value");
    }
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    try {
      if (key == "input_dim") {
        spec.input_dim = std::stoul(value);
        saw_dim = true;
      } else if (key == "hidden") {
        saw_hidden = true;
        std::istringstream widths(value);
        std::string w;
        while (std::getline(widths, w, 'x')) {
          if (!w.empty()) spec.hidden.push_back(std::stoul(w));
        }
      } else if (key == "num_classes") {
        spec.num_classes = std::stoul(value);
        saw_classes = true;
      } else if (key == "seed") {
        spec.seed = std::stoull(value);
        saw_seed = true;
      } else if (key == "scale") {
        spec.scale = std::stod(value);
      } else {
        throw ParseError("unknown fixture spec key \"" + key + "\"");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError("fixture spec value \"" + value + "\" for " + key +
                       " is not a valid number");
    }
  }
  if (!saw_dim || !saw_hidden || !saw_classes || !saw_seed) {
    throw ParseError(
        "fixture spec requires input_dim, hidden, num_classes and seed");
  }
  if (spec.input_dim == 0) throw ParseError("input_dim must be positive");
  if (spec.num_classes < 2) throw ParseError("num_classes must be at least 2");
  for (std::size_t w : spec.hidden) {
    if (w == 0) throw ParseError("hidden widths must be positive");
  }
  if (!(spec.scale > 0.0) || !std::isfinite(spec.scale)) {
    throw ParseError("scale must be positive and finite");
  }
  return spec;
}

Network generate_fixture(const FixtureSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::vector<LinearLayer> layers;
  std::size_t fan_in = spec.input_dim;
  std::vector<std::size_t> outs(spec.hidden);
  outs.push_back(spec.num_classes);
  for (std::size_t width : outs) {
    LinearLayer layer;
    layer.weights.rows = width;
    layer.weights.cols = fan_in;
    layer.weights.data.resize(width * fan_in);
    for (double& w : layer.weights.data) w = uniform_signed(rng, spec.scale);
    layer.bias.resize(width);
    for (double& b : layer.bias) b = uniform_signed(rng, spec.scale);
    layers.push_back(std::move(layer));
    fan_in = width;
  }
  return Network(std::move(layers));
}

}  // namespace relucert
