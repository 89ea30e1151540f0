#include "qslit/branch.hpp"

#include <algorithm>
#include <random>

namespace qslit {

namespace {

constexpr double kMergeTol = 1e-14;

// Born weights this far down are truncation round-off, not physics; treating
// them as measurable outcomes would renormalize garbage. The floor sits well
// above the displacement fuzz of a loose cutoff (~1e-17 at tail_tol 1e-5) and
// well below any resolvable outcome weight.
constexpr double kZeroProbability = 1e-14;

bool vectors_close(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) return false;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > kMergeTol) return false;
    return true;
}

bool branch_registers_match(const Branch& a, const Branch& b) {
    if (a.path != b.path) return false;
    for (std::size_t k = 0; k < a.atoms.size(); ++k)
        if (!vectors_close(a.atoms[k], b.atoms[k])) return false;
    for (std::size_t k = 0; k < a.fields.size(); ++k)
        if (!vectors_close(a.fields[k].amps, b.fields[k].amps)) return false;
    return true;
}

bool branch_is_zero(const Branch& b) {
    if (b.coeff == Complex(0.0, 0.0)) return true;
    for (const auto& a : b.atoms)
        if (a.squaredNorm() == 0.0) return true;
    for (const auto& f : b.fields)
        if (f.norm2() == 0.0) return true;
    return false;
}

/// Merge branches whose registers agree elementwise within 1e-14 and drop
/// exactly-zero branches. Conservative on purpose: no lossy rescaling.
void coalesce(std::vector<Branch>& branches) {
    std::vector<Branch> out;
    for (auto& b : branches) {
        if (branch_is_zero(b)) continue;
        bool merged = false;
        for (auto& o : out) {
            if (branch_registers_match(o, b)) {
                o.coeff += b.coeff;
                merged = true;
                break;
            }
        }
        if (!merged) out.push_back(std::move(b));
    }
    std::erase_if(out, [](const Branch& b) { return branch_is_zero(b); });
    branches = std::move(out);
}

Complex branch_env_overlap(const Branch& bi, const Branch& bj) {
    // <env_j | env_i> over atoms then cavities
    Complex acc(1.0, 0.0);
    for (std::size_t k = 0; k < bi.atoms.size(); ++k) {
        acc *= bj.atoms[k].dot(bi.atoms[k]);
        if (acc == Complex(0.0, 0.0)) return acc;
    }
    for (std::size_t k = 0; k < bi.fields.size(); ++k) {
        acc *= bj.fields[k].amps.dot(bi.fields[k].amps);
        if (acc == Complex(0.0, 0.0)) return acc;
    }
    return acc;
}

int atom_dim(AtomKind kind) { return kind == AtomKind::lambda ? 3 : 2; }

}  // namespace

std::vector<std::string> atom_level_labels(AtomKind kind) {
    if (kind == AtomKind::lambda) return {"a", "b", "c"};
    return {"f", "e"};
}

int atom_level_index(AtomKind kind, const std::string& label) {
    const auto labels = atom_level_labels(kind);
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end())
        fail(ErrorCode::unknown_id, "no atom level named '" + label + "'");
    return static_cast<int>(it - labels.begin());
}

int SystemLayout::path_index(const std::string& label) const {
    for (std::size_t i = 0; i < path_labels.size(); ++i)
        if (path_labels[i] == label) return static_cast<int>(i);
    fail(ErrorCode::unknown_id, "no path labeled '" + label + "'");
}

int SystemLayout::atom_index(const std::string& id) const {
    for (std::size_t i = 0; i < atoms.size(); ++i)
        if (atoms[i].id == id) return static_cast<int>(i);
    fail(ErrorCode::unknown_id, "no atom with id '" + id + "'");
}

int SystemLayout::cavity_index(const std::string& id) const {
    for (std::size_t i = 0; i < cavities.size(); ++i)
        if (cavities[i].id == id) return static_cast<int>(i);
    fail(ErrorCode::unknown_id, "no cavity with id '" + id + "'");
}

double CompositeState::norm2() const {
    const Matrix g = env_gram(*this);
    Complex acc(0.0, 0.0);
    for (std::size_t i = 0; i < branches.size(); ++i)
        for (std::size_t j = 0; j < branches.size(); ++j)
            if (branches[i].path == branches[j].path) acc += g(i, j);
    return acc.real();
}

CompositeState CompositeState::normalized() const {
    const double n2 = norm2();
    if (n2 <= 0.0) fail(ErrorCode::invariant_violation, "cannot normalize a zero state");
    CompositeState out = *this;
    const double scale = 1.0 / std::sqrt(n2);
    for (auto& b : out.branches) b.coeff *= scale;
    return out;
}

CompositeState init_double_slit(const SystemLayout& layout,
                                const std::vector<FieldState>& cavity_states,
                                const std::string& atom_level) {
    if (layout.path_labels.size() != 2)
        fail(ErrorCode::layout_mismatch, "double slit needs exactly 2 path labels");
    if (layout.cavities.size() != 2)
        fail(ErrorCode::layout_mismatch, "double slit needs exactly 2 cavities");
    int lambda_count = 0;
    for (const auto& a : layout.atoms)
        if (a.kind == AtomKind::lambda) ++lambda_count;
    if (lambda_count != 1)
        fail(ErrorCode::layout_mismatch, "double slit needs exactly 1 lambda atom");
    if (cavity_states.size() != layout.cavities.size())
        fail(ErrorCode::layout_mismatch, "one field state per cavity required");
    for (std::size_t k = 0; k < cavity_states.size(); ++k) {
        if (cavity_states[k].truncation() != layout.cavities[k].truncation)
            fail(ErrorCode::layout_mismatch, "cavity truncation mismatch for " +
                                                 layout.cavities[k].id);
        if (cavity_states[k].norm2() == 0.0)
            fail(ErrorCode::layout_mismatch,
                 "zero-amplitude state for cavity " + layout.cavities[k].id);
        if (!all_finite(cavity_states[k].amps))
            fail(ErrorCode::invariant_violation, "non-finite cavity amplitudes");
    }

    std::vector<Vector> atom_regs;
    for (const auto& a : layout.atoms) {
        Vector v = Vector::Zero(atom_dim(a.kind));
        if (a.kind == AtomKind::lambda)
            v[atom_level_index(AtomKind::lambda, atom_level)] = 1.0;
        else
            v[probe_level_f] = 1.0;
        atom_regs.push_back(std::move(v));
    }

    CompositeState state;
    state.layout = layout;
    const double amp = 1.0 / std::sqrt(2.0);
    for (int p = 0; p < 2; ++p)
        state.branches.push_back(Branch{Complex(amp, 0.0), p, atom_regs, cavity_states});
    return state;
}

CompositeState apply_cavity_interaction(const CompositeState& state, const std::string& cavity_id,
                                        const std::string& atom_id, double phi) {
    const int cav = state.layout.cavity_index(cavity_id);
    const int atom = state.layout.atom_index(atom_id);
    if (state.layout.atoms[atom].kind != AtomKind::lambda)
        fail(ErrorCode::layout_mismatch, "cavity interaction needs a lambda atom");
    int matched_path = -1;
    for (const auto& [path, cavity] : state.layout.path_cavity)
        if (cavity == cavity_id) matched_path = state.layout.path_index(path);
    if (matched_path < 0)
        fail(ErrorCode::missing_association, "no path associated with cavity " + cavity_id);

    CompositeState out;
    out.layout = state.layout;
    for (const auto& b : state.branches) {
        if (b.path != matched_path) {
            out.branches.push_back(b);
            continue;
        }
        const AtomFieldJoint evolved =
            dispersive_lambda(joint_product(b.atoms[atom], b.fields[cav]), phi);
        for (int level = 0; level < 3; ++level) {
            Vector row = evolved.row(level).transpose();
            if (row.squaredNorm() == 0.0) continue;
            Branch child = b;
            child.atoms[atom] = Vector::Zero(3);
            child.atoms[atom][level] = 1.0;
            child.fields[cav].amps = std::move(row);
            out.branches.push_back(std::move(child));
        }
    }
    coalesce(out.branches);
    return out;
}

CompositeState inject(const CompositeState& state, const std::string& cavity_id, Complex beta) {
    const int cav = state.layout.cavity_index(cavity_id);
    if (beta == Complex(0.0, 0.0)) return state;
    const int truncation = state.layout.cavities[cav].truncation;
    const Matrix op = displacement_operator(truncation, beta);
    CompositeState out = state;
    for (auto& b : out.branches) {
        FieldState& f = b.fields[cav];
        if (!std::isnan(f.envelope)) {
            const double grown = f.envelope + std::abs(beta);
            const double tail = coherent_tail_mass(grown, truncation);
            if (tail >= f.tail_tol)
                fail(ErrorCode::cutoff_too_small,
                     "injection into " + cavity_id + " overflows the cutoff (tail " +
                         std::to_string(tail) + ")");
            f.envelope = grown;
        }
        f.amps = op * f.amps;
    }
    return out;
}

CompositeState send_probe(const CompositeState& state, const std::string& cavity_id,
                          const std::string& probe_atom_id, double gt) {
    const int cav = state.layout.cavity_index(cavity_id);
    const int atom = state.layout.atom_index(probe_atom_id);
    if (state.layout.atoms[atom].kind != AtomKind::two_level)
        fail(ErrorCode::layout_mismatch, "send_probe needs a two-level atom");
    for (const auto& b : state.branches)
        if (!vectors_close(b.atoms[atom], state.branches.front().atoms[atom]))
            fail(ErrorCode::invariant_violation,
                 "probe " + probe_atom_id + " is not in a product state across branches");

    CompositeState out;
    out.layout = state.layout;
    for (const auto& b : state.branches) {
        const AtomFieldJoint evolved = jc_evolve(joint_product(b.atoms[atom], b.fields[cav]), gt);
        for (int level = 0; level < 2; ++level) {
            Vector row = evolved.row(level).transpose();
            if (row.squaredNorm() == 0.0) continue;
            Branch child = b;
            child.atoms[atom] = Vector::Zero(2);
            child.atoms[atom][level] = 1.0;
            child.fields[cav].amps = std::move(row);
            out.branches.push_back(std::move(child));
        }
    }
    coalesce(out.branches);
    return out;
}

namespace {

CompositeState project_atom(const CompositeState& state, int atom, int level) {
    CompositeState out;
    out.layout = state.layout;
    for (const auto& b : state.branches) {
        const Complex amp = b.atoms[atom][level];
        if (amp == Complex(0.0, 0.0)) continue;
        Branch child = b;
        child.coeff *= amp;
        child.atoms[atom] = Vector::Zero(b.atoms[atom].size());
        child.atoms[atom][level] = 1.0;
        out.branches.push_back(std::move(child));
    }
    coalesce(out.branches);
    return out;
}

}  // namespace

std::map<std::string, double> outcome_probabilities(const CompositeState& state,
                                                    const std::string& atom_id) {
    const int atom = state.layout.atom_index(atom_id);
    const AtomKind kind = state.layout.atoms[atom].kind;
    const double total = state.norm2();
    std::map<std::string, double> probs;
    const auto labels = atom_level_labels(kind);
    for (std::size_t level = 0; level < labels.size(); ++level) {
        const CompositeState projected = project_atom(state, atom, static_cast<int>(level));
        probs[labels[level]] = projected.norm2() / total;
    }
    return probs;
}

std::pair<MeasurementRecord, CompositeState> measure_atom(const CompositeState& state,
                                                          const std::string& atom_id,
                                                          MeasureMode mode,
                                                          const std::string& outcome,
                                                          std::uint64_t seed) {
    const int atom = state.layout.atom_index(atom_id);
    const AtomKind kind = state.layout.atoms[atom].kind;
    const auto labels = atom_level_labels(kind);
    const double total = state.norm2();

    int chosen = -1;
    double probability = 0.0;
    if (mode == MeasureMode::postselect) {
        chosen = atom_level_index(kind, outcome);
        probability = project_atom(state, atom, chosen).norm2() / total;
        if (probability < kZeroProbability)
            fail(ErrorCode::impossible_outcome,
                 "P(" + atom_id + "=" + outcome + ") is zero");
    } else {
        std::vector<double> probs(labels.size());
        for (std::size_t level = 0; level < labels.size(); ++level)
            probs[level] = project_atom(state, atom, static_cast<int>(level)).norm2() / total;
        std::mt19937_64 gen(seed);
        const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        // cumulative inversion, outcomes in declaration order
        double cum = 0.0;
        for (std::size_t level = 0; level < probs.size(); ++level) {
            cum += probs[level];
            if (u < cum || level + 1 == probs.size()) {
                chosen = static_cast<int>(level);
                probability = probs[level];
                break;
            }
        }
        if (probability < kZeroProbability)
            fail(ErrorCode::impossible_outcome, "sampled a zero-probability outcome");
    }

    CompositeState collapsed = project_atom(state, atom, chosen).normalized();
    return {MeasurementRecord{atom_id, labels[chosen], probability}, std::move(collapsed)};
}

Matrix env_gram(const CompositeState& state) {
    const std::size_t n = state.branches.size();
    Matrix g(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            g(i, j) = state.branches[i].coeff * std::conj(state.branches[j].coeff) *
                      branch_env_overlap(state.branches[i], state.branches[j]);
    return g;
}

Matrix path_gram(const CompositeState& state) {
    const Matrix g = env_gram(state);
    const std::size_t paths = state.layout.path_labels.size();
    Matrix pg = Matrix::Zero(paths, paths);
    for (std::size_t i = 0; i < state.branches.size(); ++i)
        for (std::size_t j = 0; j < state.branches.size(); ++j)
            pg(state.branches[i].path, state.branches[j].path) += g(i, j);
    return pg;
}

Complex composite_inner(const CompositeState& a, const CompositeState& b) {
    Complex acc(0.0, 0.0);
    for (const auto& bi : a.branches)
        for (const auto& bj : b.branches)
            if (bi.path == bj.path)
                acc += bi.coeff * std::conj(bj.coeff) * branch_env_overlap(bi, bj);
    return acc;
}

double composite_fidelity(const CompositeState& a, const CompositeState& b) {
    const double n2 = a.norm2() * b.norm2();
    if (n2 == 0.0) return 0.0;
    return std::norm(composite_inner(a, b)) / n2;
}

}  // namespace qslit
