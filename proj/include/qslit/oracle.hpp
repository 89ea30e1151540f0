#pragma once

#include "qslit/script.hpp"

namespace qslit {

/// Full amplitude vector over path ⊗ atoms ⊗ cavities with explicit mixed-radix
/// strides, registers in layout order: [path, atoms..., cavities...].
struct DenseState {
    std::vector<int> dims;
    Vector amps;

    std::size_t dimension() const { return static_cast<std::size_t>(amps.size()); }
};

struct DenseTrace {
    std::vector<std::string> labels;
    std::vector<DenseState> states;
    std::vector<MeasurementRecord> records;
};

struct ResidualReport {
    struct StepResidual {
        std::string label;
        double residual;
    };
    std::vector<StepResidual> per_step;
    double max_residual = 0.0;
};

/// Brute-force reference run: every scripted operation applied as an explicit
/// matrix on the dense tensor product. Built matrices are unitarity-checked to
/// 1e-12. Rejects scripts whose total dimension exceeds 2^20. Sampling steps
/// are replayed with the outcomes in `forced_outcomes` (one per measure step,
/// e.g. taken from the branch engine's records).
DenseTrace dense_run(const ScenarioScript& script,
                     const std::vector<std::string>& forced_outcomes = {});

/// Expand a branch-engine state into the dense basis (same register order).
DenseState branch_to_dense(const CompositeState& state);

/// Max absolute amplitude difference per step after aligning the global phase
/// on the largest-magnitude dense amplitude.
ResidualReport compare(const DenseTrace& dense, const BranchTrace& branch);

}  // namespace qslit
