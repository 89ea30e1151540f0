#pragma once

#include <cstdint>
#include <optional>

#include "qslit/branch.hpp"

namespace qslit {

/// One scripted operation on the composite system. Scripts are the common
/// input of the branch engine and the dense reference simulator, so the two
/// can be run in lockstep and compared step by step.
struct Step {
    enum class Kind { cavity_interaction, inject, send_probe, measure };
    Kind kind;
    std::string label;
    std::string cavity;
    std::string atom;
    double phi = 0.0;
    double gt = 0.0;
    Complex beta = 0.0;
    MeasureMode mode = MeasureMode::postselect;
    std::string outcome;
    std::uint64_t seed = 0;
};

struct ScenarioScript {
    SystemLayout layout;
    std::vector<FieldState> initial_fields;
    std::string initial_atom_level = "b";
    std::vector<Step> steps;
};

struct BranchTrace {
    std::vector<std::string> labels;
    std::vector<CompositeState> states;  // states[0] = prepared state
    std::vector<MeasurementRecord> records;
};

BranchTrace run_script(const ScenarioScript& script);

}  // namespace qslit
