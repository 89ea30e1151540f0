#include "qslit/script.hpp"

namespace qslit {

BranchTrace run_script(const ScenarioScript& script) {
    BranchTrace trace;
    CompositeState state =
        init_double_slit(script.layout, script.initial_fields, script.initial_atom_level);
    trace.labels.push_back("prepare");
    trace.states.push_back(state);

    for (const auto& step : script.steps) {
        switch (step.kind) {
            case Step::Kind::cavity_interaction:
                state = apply_cavity_interaction(state, step.cavity, step.atom, step.phi);
                break;
            case Step::Kind::inject:
                state = inject(state, step.cavity, step.beta);
                break;
            case Step::Kind::send_probe:
                state = send_probe(state, step.cavity, step.atom, step.gt);
                break;
            case Step::Kind::measure: {
                auto [record, collapsed] =
                    measure_atom(state, step.atom, step.mode, step.outcome, step.seed);
                trace.records.push_back(record);
                state = std::move(collapsed);
                break;
            }
        }
        trace.labels.push_back(step.label);
        trace.states.push_back(state);
    }
    return trace;
}

}  // namespace qslit
