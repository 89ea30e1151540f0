#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qslit/interactions.hpp"

namespace qslit {

enum class AtomKind { lambda, two_level };

std::vector<std::string> atom_level_labels(AtomKind kind);
int atom_level_index(AtomKind kind, const std::string& label);

struct SystemLayout {
    struct Atom {
        std::string id;
        AtomKind kind;
    };
    struct Cavity {
        std::string id;
        int truncation;
    };

    std::vector<std::string> path_labels;
    std::vector<Atom> atoms;
    std::vector<Cavity> cavities;
    // which cavity sits behind which slit
    std::vector<std::pair<std::string, std::string>> path_cavity;

    int path_index(const std::string& label) const;
    int atom_index(const std::string& id) const;
    int cavity_index(const std::string& id) const;
};

/// One ket term of the composite superposition: a path label plus a pure
/// internal state per atom and a field state per cavity. Registers may be
/// unnormalized; the physical weight is |coeff|^2 times the register norms.
struct Branch {
    Complex coeff;
    int path;
    std::vector<Vector> atoms;
    std::vector<FieldState> fields;
};

struct MeasurementRecord {
    std::string atom_id;
    std::string outcome;
    double probability;
};

enum class MeasureMode { postselect, sample };

struct CompositeState {
    SystemLayout layout;
    std::vector<Branch> branches;

    double norm2() const;
    CompositeState normalized() const;
};

/// (|path_0> + |path_1>)/sqrt(2) ⊗ cavity fields ⊗ lambda atom in the given
/// level, probes in their ground state.
CompositeState init_double_slit(const SystemLayout& layout,
                                const std::vector<FieldState>& cavity_states,
                                const std::string& atom_level);

/// Dispersive passage of a lambda atom through one cavity, applied only on
/// branches whose path label is associated with that cavity. Branches split
/// into one branch per populated atom level.
CompositeState apply_cavity_interaction(const CompositeState& state, const std::string& cavity_id,
                                        const std::string& atom_id, double phi);

/// D(beta) on one cavity register in every branch.
CompositeState inject(const CompositeState& state, const std::string& cavity_id, Complex beta);

/// Jaynes-Cummings passage of a fresh two-level probe through one cavity,
/// applied in every branch; branches split into f/e components.
CompositeState send_probe(const CompositeState& state, const std::string& cavity_id,
                          const std::string& probe_atom_id, double gt);

/// Born probabilities of each internal level of one atom, in level order.
std::map<std::string, double> outcome_probabilities(const CompositeState& state,
                                                    const std::string& atom_id);

/// Projective measurement of one atom. postselect takes the given outcome
/// (impossible-outcome if its probability is zero); sample draws from the
/// Born distribution with a seeded generator, outcomes in level order.
std::pair<MeasurementRecord, CompositeState> measure_atom(const CompositeState& state,
                                                          const std::string& atom_id,
                                                          MeasureMode mode,
                                                          const std::string& outcome = "",
                                                          std::uint64_t seed = 0);

/// G_ij = c_i c_j* prod_registers <reg_j|reg_i> over atoms and cavities; the
/// path label is excluded. Hermitian with non-negative diagonal.
Matrix env_gram(const CompositeState& state);

/// Path-block sums of env_gram: P_pq = sum over branches i in path p, j in q.
Matrix path_gram(const CompositeState& state);

/// <b|a> including the path delta.
Complex composite_inner(const CompositeState& a, const CompositeState& b);

double composite_fidelity(const CompositeState& a, const CompositeState& b);

}  // namespace qslit
