#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qslit/scenario.hpp"

namespace qslit {

/// Deterministic JSON serialization: object keys sorted, doubles printed with
/// 17 significant digits (%.17g), integers verbatim. Non-finite numbers are
/// rejected so NaN/Inf can never reach an output file.
void write_json_17g(const Json& doc, std::ostream& out);
std::string json_to_string_17g(const Json& doc);

Json report_to_json(const ScenarioReport& report);

/// density.csv: header x,raw_density,normalized_density; shortest
/// round-trip float formatting; rows strictly increasing in x.
void write_density_csv(const ScreenDistribution& dist, std::ostream& out);

void write_steps_log(const ScenarioReport& report, std::ostream& out);

/// Minimal JSON-schema checker covering the subset the shipped report schema
/// uses: type, properties, required, items, enum, additionalProperties,
/// minimum/maximum. Returns human-readable violations; empty means valid.
std::vector<std::string> schema_validate(const Json& schema, const Json& doc);

}  // namespace qslit
