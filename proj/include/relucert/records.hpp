#pragma once

#include <cstddef>
#include <optional>

#include "json.hpp"
#include "relucert/certifier.hpp"
#include "relucert/lower_bound.hpp"
#include "relucert/oracle.hpp"

namespace relucert {

// One machine-readable line per processed instance. Field sets are closed;
// validate_record rejects anything outside them so downstream consumers can
// rely on the shape.

nlohmann::json certify_record(std::size_t id, double epsilon,
                              const CertificationResult& result);

nlohmann::json lower_bound_record(std::size_t id, double epsilon_max,
                                  const LowerBoundOutcome& outcome);

// distance is null when no decision boundary exists anywhere. The robust
// flag appears only when the caller supplied an epsilon to compare against.
nlohmann::json oracle_record(std::size_t id, const MinDistortion& distortion,
                             std::optional<double> epsilon);

// Throws ParseError when the record violates the schema: unknown mode or
// field, status outside the vocabulary, witness present without a
// not_robust/tight status, or malformed stats.
void validate_record(const nlohmann::json& record);

}  // namespace relucert
