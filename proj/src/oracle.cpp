#include "qslit/oracle.hpp"

#include <cmath>

namespace qslit {

namespace {

constexpr std::size_t kMaxDimension = std::size_t(1) << 20;

// same floor the branch engine uses: weights below it are truncation fuzz
constexpr double kZeroProbability = 1e-14;

struct Registers {
    std::vector<int> dims;     // [paths, atom dims..., cavity dims...]
    std::vector<long> strides;  // row-major

    std::size_t total() const {
        std::size_t t = 1;
        for (int d : dims) t *= static_cast<std::size_t>(d);
        return t;
    }
    void compute_strides() {
        strides.assign(dims.size(), 1);
        for (int k = static_cast<int>(dims.size()) - 2; k >= 0; --k)
            strides[k] = strides[k + 1] * dims[k + 1];
    }
};

Registers make_registers(const SystemLayout& layout) {
    Registers r;
    r.dims.push_back(static_cast<int>(layout.path_labels.size()));
    for (const auto& a : layout.atoms) r.dims.push_back(a.kind == AtomKind::lambda ? 3 : 2);
    for (const auto& c : layout.cavities) r.dims.push_back(c.truncation + 1);
    r.compute_strides();
    return r;
}

void check_unitary(const Matrix& u) {
    const Matrix defect = u.adjoint() * u - Matrix::Identity(u.rows(), u.cols());
    if (defect.cwiseAbs().maxCoeff() >= 1e-12)
        fail(ErrorCode::internal_error, "dense operator failed the unitarity check");
}

// sub-index convention for two-register ops: m = digit(regA) * dimB + digit(regB)
Matrix dense_dispersive(int fock_dim, double phi) {
    const int dim = 3 * fock_dim;
    Matrix u = Matrix::Zero(dim, dim);
    for (int n = 0; n < fock_dim; ++n) {
        const Complex p = phase_factor(phi, n);
        const Complex diag = (p + 1.0) / 2.0;
        const Complex off = (p - 1.0) / 2.0;
        u(0 * fock_dim + n, 0 * fock_dim + n) = -p;
        u(1 * fock_dim + n, 1 * fock_dim + n) = diag;
        u(1 * fock_dim + n, 2 * fock_dim + n) = off;
        u(2 * fock_dim + n, 1 * fock_dim + n) = off;
        u(2 * fock_dim + n, 2 * fock_dim + n) = diag;
    }
    check_unitary(u);
    return u;
}

Matrix dense_jc(int fock_dim, double gt) {
    const int dim = 2 * fock_dim;
    Matrix u = Matrix::Identity(dim, dim);
    const Complex mi(0.0, -1.0);
    for (int n = 1; n < fock_dim; ++n) {
        const double angle = gt * std::sqrt(double(n));
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        const int f_n = 0 * fock_dim + n;
        const int e_nm1 = 1 * fock_dim + (n - 1);
        u(f_n, f_n) = c;
        u(f_n, e_nm1) = mi * s;
        u(e_nm1, f_n) = mi * s;
        u(e_nm1, e_nm1) = c;
    }
    check_unitary(u);
    return u;
}

Matrix dense_displacement(int fock_dim, Complex beta) {
    Matrix lower = Matrix::Zero(fock_dim, fock_dim);  // annihilation operator
    for (int n = 1; n < fock_dim; ++n) lower(n - 1, n) = std::sqrt(double(n));
    const Matrix raise = lower.adjoint();
    const Matrix h = Complex(0.0, 1.0) * (beta * raise - std::conj(beta) * lower);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    Matrix phases = Matrix::Zero(fock_dim, fock_dim);
    for (int k = 0; k < fock_dim; ++k)
        phases(k, k) = std::polar(1.0, -solver.eigenvalues()[k]);
    Matrix u = solver.eigenvectors() * phases * solver.eigenvectors().adjoint();
    check_unitary(u);
    return u;
}

std::vector<int> decompose(std::size_t index, const Registers& regs) {
    std::vector<int> digits(regs.dims.size());
    for (std::size_t k = 0; k < regs.dims.size(); ++k) {
        digits[k] = static_cast<int>(index / regs.strides[k]);
        index %= regs.strides[k];
    }
    return digits;
}

/// Apply a matrix over one or two registers; path_filter >= 0 restricts the
/// action to that path index (a path-controlled operation).
void apply_op(DenseState& state, const Registers& regs, const std::vector<int>& target_regs,
              const Matrix& u, int path_filter = -1) {
    std::size_t sub_dim = 1;
    for (int r : target_regs) sub_dim *= static_cast<std::size_t>(regs.dims[r]);
    if (static_cast<Eigen::Index>(sub_dim) != u.rows())
        fail(ErrorCode::internal_error, "operator dimension mismatch");

    Vector fiber(sub_dim);
    const std::size_t total = state.dimension();
    for (std::size_t base = 0; base < total; ++base) {
        const auto digits = decompose(base, regs);
        bool is_base = true;
        for (int r : target_regs)
            if (digits[r] != 0) { is_base = false; break; }
        if (!is_base) continue;
        if (path_filter >= 0 && digits[0] != path_filter) continue;

        for (std::size_t m = 0; m < sub_dim; ++m) {
            std::size_t idx = base;
            std::size_t rem = m;
            for (std::size_t t = target_regs.size(); t-- > 0;) {
                const int r = target_regs[t];
                idx += (rem % regs.dims[r]) * regs.strides[r];
                rem /= regs.dims[r];
            }
            fiber[m] = state.amps[idx];
        }
        Vector evolved = u * fiber;
        for (std::size_t m = 0; m < sub_dim; ++m) {
            std::size_t idx = base;
            std::size_t rem = m;
            for (std::size_t t = target_regs.size(); t-- > 0;) {
                const int r = target_regs[t];
                idx += (rem % regs.dims[r]) * regs.strides[r];
                rem /= regs.dims[r];
            }
            state.amps[idx] = evolved[m];
        }
    }
}

double project_level(DenseState& state, const Registers& regs, int reg, int level) {
    const double before = state.amps.squaredNorm();
    const std::size_t total = state.dimension();
    for (std::size_t i = 0; i < total; ++i) {
        const int digit = static_cast<int>(i / regs.strides[reg]) % regs.dims[reg];
        if (digit != level) state.amps[i] = Complex(0.0, 0.0);
    }
    return before > 0.0 ? state.amps.squaredNorm() / before : 0.0;
}

}  // namespace

DenseState branch_to_dense(const CompositeState& state) {
    const Registers regs = make_registers(state.layout);
    DenseState dense;
    dense.dims = regs.dims;
    dense.amps = Vector::Zero(regs.total());
    const std::size_t total = regs.total();
    for (const auto& b : state.branches) {
        for (std::size_t i = 0; i < total; ++i) {
            const auto digits = decompose(i, regs);
            if (digits[0] != b.path) continue;
            Complex amp = b.coeff;
            for (std::size_t a = 0; a < b.atoms.size(); ++a) amp *= b.atoms[a][digits[1 + a]];
            if (amp == Complex(0.0, 0.0)) continue;
            for (std::size_t c = 0; c < b.fields.size(); ++c)
                amp *= b.fields[c].amps[digits[1 + b.atoms.size() + c]];
            dense.amps[i] += amp;
        }
    }
    return dense;
}

DenseTrace dense_run(const ScenarioScript& script, const std::vector<std::string>& forced_outcomes) {
    const Registers regs = make_registers(script.layout);
    if (regs.total() > kMaxDimension)
        fail(ErrorCode::dimension_too_large,
             "dense dimension " + std::to_string(regs.total()) + " exceeds the oracle bound");

    // prepared product state, both paths at 1/sqrt(2)
    DenseState state;
    state.dims = regs.dims;
    state.amps = Vector::Zero(regs.total());
    {
        std::vector<int> atom_levels;
        for (const auto& a : script.layout.atoms)
            atom_levels.push_back(a.kind == AtomKind::lambda
                                      ? atom_level_index(AtomKind::lambda, script.initial_atom_level)
                                      : probe_level_f);
        const std::size_t n_cav = script.layout.cavities.size();
        std::vector<int> photon(n_cav, 0);
        const double amp0 = 1.0 / std::sqrt(2.0);
        bool done = false;
        while (!done) {
            Complex famp(amp0, 0.0);
            for (std::size_t c = 0; c < n_cav; ++c)
                famp *= script.initial_fields[c].amps[photon[c]];
            if (famp != Complex(0.0, 0.0)) {
                for (int p = 0; p < regs.dims[0]; ++p) {
                    std::size_t idx = p * regs.strides[0];
                    for (std::size_t a = 0; a < atom_levels.size(); ++a)
                        idx += atom_levels[a] * regs.strides[1 + a];
                    for (std::size_t c = 0; c < n_cav; ++c)
                        idx += photon[c] * regs.strides[1 + atom_levels.size() + c];
                    state.amps[idx] = famp;
                }
            }
            done = true;
            for (std::size_t c = 0; c < n_cav; ++c) {
                if (++photon[c] <= script.layout.cavities[c].truncation) { done = false; break; }
                photon[c] = 0;
            }
        }
    }

    DenseTrace trace;
    trace.labels.push_back("prepare");
    trace.states.push_back(state);

    std::size_t measure_index = 0;
    for (const auto& step : script.steps) {
        switch (step.kind) {
            case Step::Kind::cavity_interaction: {
                const int cav = script.layout.cavity_index(step.cavity);
                const int atom = script.layout.atom_index(step.atom);
                int matched = -1;
                for (const auto& [path, cavity] : script.layout.path_cavity)
                    if (cavity == step.cavity) matched = script.layout.path_index(path);
                if (matched < 0)
                    fail(ErrorCode::missing_association, "no path for cavity " + step.cavity);
                const int fock_dim = script.layout.cavities[cav].truncation + 1;
                apply_op(state, regs,
                         {1 + atom, 1 + static_cast<int>(script.layout.atoms.size()) + cav},
                         dense_dispersive(fock_dim, step.phi), matched);
                break;
            }
            case Step::Kind::inject: {
                const int cav = script.layout.cavity_index(step.cavity);
                const int fock_dim = script.layout.cavities[cav].truncation + 1;
                apply_op(state, regs,
                         {1 + static_cast<int>(script.layout.atoms.size()) + cav},
                         dense_displacement(fock_dim, step.beta));
                break;
            }
            case Step::Kind::send_probe: {
                const int cav = script.layout.cavity_index(step.cavity);
                const int atom = script.layout.atom_index(step.atom);
                const int fock_dim = script.layout.cavities[cav].truncation + 1;
                apply_op(state, regs,
                         {1 + atom, 1 + static_cast<int>(script.layout.atoms.size()) + cav},
                         dense_jc(fock_dim, step.gt));
                break;
            }
            case Step::Kind::measure: {
                const int atom = script.layout.atom_index(step.atom);
                const AtomKind kind = script.layout.atoms[atom].kind;
                std::string outcome = step.outcome;
                if (step.mode == MeasureMode::sample) {
                    if (measure_index >= forced_outcomes.size())
                        fail(ErrorCode::config_mismatch,
                             "sampled measurement needs a forced outcome for the dense run");
                    outcome = forced_outcomes[measure_index];
                } else if (measure_index < forced_outcomes.size()) {
                    outcome = forced_outcomes[measure_index];
                }
                const int level = atom_level_index(kind, outcome);
                const double p = project_level(state, regs, 1 + atom, level);
                if (p < kZeroProbability)
                    fail(ErrorCode::impossible_outcome,
                         "dense postselection on " + step.atom + "=" + outcome + " has zero norm");
                state.amps /= std::sqrt(state.amps.squaredNorm());
                trace.records.push_back(MeasurementRecord{step.atom, outcome, p});
                ++measure_index;
                break;
            }
        }
        trace.labels.push_back(step.label);
        trace.states.push_back(state);
    }
    return trace;
}

ResidualReport compare(const DenseTrace& dense, const BranchTrace& branch) {
    if (dense.states.size() != branch.states.size())
        fail(ErrorCode::config_mismatch, "traces have different step counts");
    ResidualReport report;
    for (std::size_t s = 0; s < dense.states.size(); ++s) {
        const DenseState expanded = branch_to_dense(branch.states[s]);
        const Vector& ref = dense.states[s].amps;
        if (expanded.amps.size() != ref.size())
            fail(ErrorCode::config_mismatch, "trace dimensions differ at step " +
                                                 std::to_string(s));
        Eigen::Index k = 0;
        ref.cwiseAbs().maxCoeff(&k);
        Complex phase(1.0, 0.0);
        if (std::abs(ref[k]) > 0.0 && std::abs(expanded.amps[k]) > 0.0) {
            phase = ref[k] / expanded.amps[k];
            phase /= std::abs(phase);
        }
        const double residual = (ref - phase * expanded.amps).cwiseAbs().maxCoeff();
        report.per_step.push_back({dense.labels[s], residual});
        report.max_residual = std::max(report.max_residual, residual);
    }
    return report;
}

}  // namespace qslit
