#pragma once

#include "qslit/fock.hpp"

namespace qslit {

/// Dispersive-passage parameters. phi = 2 g^2 tau / delta is the only number
/// the unitary actually needs; g, delta, tau are kept for provenance.
struct InteractionParams {
    double g = 0.0;
    double delta = 0.0;
    double tau = 0.0;
    double phi = pi;
    double jc_gt = 0.0;

    static InteractionParams dispersive(double g, double delta, double tau);
};

/// Joint (atom ⊗ mode) amplitudes: row = atom level, column = photon number.
/// Lambda atoms use rows {a, b, c} = {0, 1, 2}; two-level probes {f, e} = {0, 1}.
using AtomFieldJoint = Matrix;

inline constexpr int lambda_level_a = 0;
inline constexpr int lambda_level_b = 1;
inline constexpr int lambda_level_c = 2;
inline constexpr int probe_level_f = 0;
inline constexpr int probe_level_e = 1;

AtomFieldJoint joint_product(const Vector& atom, const FieldState& field);

/// Far-detuned lambda-atom passage. Per photon number n:
///   |a> -> -e^{i phi n} |a>
///   (|b>,|c>) mixed by [[(p+1)/2, (p-1)/2], [(p-1)/2, (p+1)/2]], p = e^{i phi n}.
/// Diagonal in n, hence exactly unitary on the truncated space. At phi = pi the
/// b/c rows become the (e^{i pi a†a} ± 1)/2 parity components of the field.
AtomFieldJoint dispersive_lambda(const AtomFieldJoint& joint, double phi);

/// Resonant Jaynes-Cummings evolution, exact per excitation manifold:
///   |f,n>   ->  cos(gt sqrt(n)) |f,n>   - i sin(gt sqrt(n)) |e,n-1>
///   |e,n-1> -> -i sin(gt sqrt(n)) |f,n> +   cos(gt sqrt(n)) |e,n-1>
/// |f,0> is fixed; |e,N> (whose partner lies beyond the cutoff) is fixed too,
/// keeping the map unitary on the truncated space.
AtomFieldJoint jc_evolve(const AtomFieldJoint& joint, double gt);

/// sum_n |c_{n+1}|^2 sin^2(gt sqrt(n+1)) for a normalized field: the
/// probability that a ground-state probe leaves excited.
double jc_excitation_probability(const FieldState& field, double gt);

}  // namespace qslit
