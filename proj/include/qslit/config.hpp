#pragma once

#include <string_view>

#include "qslit/scenario.hpp"

namespace qslit {

/// Parse a JSON scenario configuration. Unknown keys are rejected with the
/// offending key path; complex numbers are [re, im] pairs; omitted fields get
/// the engine defaults. The result always passes validate_config.
ScenarioConfig parse_config(std::string_view text);

/// Invariant checks without running anything; throws invariant-violation
/// naming the offending field.
void validate_config(const ScenarioConfig& config);

/// Canonical echo with every default resolved, suitable for provenance and
/// for re-parsing (round-trips to an identical document).
Json config_to_json(const ScenarioConfig& config);

}  // namespace qslit
