#include "relucert/records.hpp"

#include <cmath>
#include <set>
#include <string>

namespace relucert {

namespace {

using nlohmann::json;

json stats_json(const SearchStats& s) {
  return {{"regions_visited", s.regions_visited},
          {"constraints_enqueued", s.constraints_enqueued},
          {"solver_calls", s.solver_calls},
          {"elapsed_ms", s.elapsed.count()}};
}

const char* status_name(CertifyStatus s) {
  switch (s) {
    case CertifyStatus::kRobust: return "robust";
    case CertifyStatus::kNotRobust: return "not_robust";
    case CertifyStatus::kUnknown: return "unknown";
    case CertifyStatus::kTimeout: return "timeout";
  }
  return "unknown";
}

const char* status_name(LowerBoundStatus s) {
  switch (s) {
    case LowerBoundStatus::kExhaustedAtEpsilon: return "exhausted_at_epsilon";
    case LowerBoundStatus::kStoppedAtBoundary: return "stopped_at_boundary";
    case LowerBoundStatus::kTimeout: return "timeout";
  }
  return "timeout";
}

void expect_fields(const json& doc, const std::set<std::string>& required,
                   const std::set<std::string>& optional) {
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (!required.count(key) && !optional.count(key)) {
      throw ParseError("record has unknown field \"" + key + "\"");
    }
  }
  for (const std::string& key : required) {
    if (!doc.contains(key)) {
      throw ParseError("record is missing field \"" + key + "\"");
    }
  }
}

void check_witness(const json& doc) {
  if (!doc.contains("witness")) return;
  const json& w = doc["witness"];
  if (!w.is_array() || w.empty()) {
    throw ParseError("record witness must be a non-empty array");
  }
  for (const json& v : w) {
    if (!v.is_number()) throw ParseError("record witness entries must be numbers");
  }
}

void check_stats(const json& doc) {
  const json& stats = doc.at("stats");
  expect_fields(stats,
                {"regions_visited", "constraints_enqueued", "solver_calls",
                 "elapsed_ms"},
                {});
  for (const char* key : {"regions_visited", "constraints_enqueued", "solver_calls"}) {
    if (!stats.at(key).is_number_unsigned() && !stats.at(key).is_number_integer()) {
      throw ParseError(std::string("record stats.") + key + " must be an integer");
    }
  }
  if (!stats.at("elapsed_ms").is_number()) {
    throw ParseError("record stats.elapsed_ms must be a number");
  }
}

}  // namespace

json certify_record(std::size_t id, double epsilon,
                    const CertificationResult& result) {
  json doc = {{"id", id},
              {"mode", "certify"},
              {"epsilon", epsilon},
              {"status", status_name(result.status)},
              {"stats", stats_json(result.stats)}};
  if (result.witness) doc["witness"] = *result.witness;
  return doc;
}

json lower_bound_record(std::size_t id, double epsilon_max,
                        const LowerBoundOutcome& outcome) {
  json doc = {{"id", id},
              {"mode", "lower-bound"},
              {"epsilon_max", epsilon_max},
              {"status", status_name(outcome.status)},
              {"bound", outcome.bound},
              {"tight", outcome.tight},
              {"stats", stats_json(outcome.stats)}};
  if (outcome.witness) doc["witness"] = *outcome.witness;
  return doc;
}

json oracle_record(std::size_t id, const MinDistortion& distortion,
                   std::optional<double> epsilon) {
  json doc = {{"id", id},
              {"mode", "oracle"},
              {"unresolved", distortion.unresolved}};
  if (std::isfinite(distortion.distance)) {
    doc["distance"] = distortion.distance;
  } else {
    doc["distance"] = nullptr;
  }
  if (distortion.witness) doc["witness"] = *distortion.witness;
  if (epsilon) {
    doc["epsilon"] = *epsilon;
    doc["robust"] = distortion.distance > *epsilon;
  }
  return doc;
}

void validate_record(const json& record) {
  if (!record.is_object()) throw ParseError("record must be an object");
  const json& mode = record.contains("mode") ? record["mode"] : json();
  if (!mode.is_string()) throw ParseError("record is missing a string mode");
  const std::string m = mode.get<std::string>();

  if (m == "certify") {
    expect_fields(record, {"id", "mode", "epsilon", "status", "stats"}, {"witness"});
    const std::string status = record.at("status").get<std::string>();
    static const std::set<std::string> vocab = {"robust", "not_robust", "unknown",
                                                "timeout"};
    if (!vocab.count(status)) {
      throw ParseError("certify record has status \"" + status + "\"");
    }
    if (record.contains("witness") != (status == "not_robust")) {
      throw ParseError("certify record witness must appear exactly when not_robust");
    }
    check_witness(record);
    check_stats(record);
    return;
  }

  if (m == "lower-bound") {
    expect_fields(record,
                  {"id", "mode", "epsilon_max", "status", "bound", "tight", "stats"},
                  {"witness"});
    const std::string status = record.at("status").get<std::string>();
    static const std::set<std::string> vocab = {"exhausted_at_epsilon",
                                                "stopped_at_boundary", "timeout"};
    if (!vocab.count(status)) {
      throw ParseError("lower-bound record has status \"" + status + "\"");
    }
    const json& bound = record.at("bound");
    if (!bound.is_number() || bound.get<double>() < 0.0) {
      throw ParseError("lower-bound record bound must be a nonnegative number");
    }
    if (!record.at("tight").is_boolean()) {
      throw ParseError("lower-bound record tight must be a boolean");
    }
    if (record.contains("witness") != record.at("tight").get<bool>()) {
      throw ParseError("lower-bound record witness must appear exactly when tight");
    }
    check_witness(record);
    check_stats(record);
    return;
  }

  if (m == "oracle") {
    expect_fields(record, {"id", "mode", "distance", "unresolved"},
                  {"witness", "epsilon", "robust"});
    const json& distance = record.at("distance");
    if (!distance.is_null() && !(distance.is_number() && distance.get<double>() >= 0.0)) {
      throw ParseError("oracle record distance must be null or nonnegative");
    }
    if (record.contains("epsilon") != record.contains("robust")) {
      throw ParseError("oracle record epsilon and robust appear together");
    }
    check_witness(record);
    return;
  }

  throw ParseError("record has unknown mode \"" + m + "\"");
}

}  // namespace relucert
