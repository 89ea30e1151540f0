#pragma once

#include <limits>

#include "qslit/errors.hpp"
#include "qslit/types.hpp"

namespace qslit {

/// A single cavity mode in a truncated Fock basis. amps[n] is the amplitude
/// of the n-photon component, n = 0..truncation. States are immutable values;
/// every operation below returns a fresh state.
///
/// `envelope` tracks the largest coherent amplitude the state can contain
/// (|alpha| for coherent and cat states, grown by |beta| under displacement).
/// It drives the cutoff checks; NaN means unknown and skips them.
struct FieldState {
    Vector amps;
    double envelope = std::numeric_limits<double>::quiet_NaN();
    double tail_tol = 1e-12;

    int truncation() const { return static_cast<int>(amps.size()) - 1; }
    double norm2() const { return amps.squaredNorm(); }
    double norm() const { return amps.norm(); }
    bool is_normalized(double tol = 1e-12) const { return std::abs(norm2() - 1.0) < tol; }
};

enum class CatSign { plus, minus };

/// Poisson tail mass sum_{n>truncation} e^{-a^2} a^{2n} / n! for |alpha| = a.
double coherent_tail_mass(double amplitude, int truncation);

/// Cutoff so that coherent_tail_mass(2*max_amplitude, N) is far below 1e-12:
/// N = ceil(4 (2 a)^2 + 20).
int default_truncation(double max_amplitude);

/// |alpha> with c_n = e^{-|alpha|^2/2} alpha^n / sqrt(n!).
/// Rejects cutoffs whose tail mass reaches tail_tol.
FieldState make_coherent(Complex alpha, int truncation, double tail_tol = 1e-12);

FieldState vacuum_state(int truncation);

/// |alpha> ± |-alpha>, unnormalized by default. With normalize set, divides by
/// sqrt(2 (1 ± e^{-2|alpha|^2})). The minus cat at alpha = 0 is the zero
/// vector and is rejected.
FieldState make_cat(Complex alpha, CatSign sign, int truncation, bool normalize = false,
                    double tail_tol = 1e-12);

/// e^{i phi a†a}: multiplies c_n by e^{i phi n}. Exact parity at phi = ±pi.
FieldState apply_number_phase(const FieldState& state, double phi);

/// The operators (e^{i pi a†a} ± 1)/2. plus keeps even components and removes
/// odd ones; minus removes even components and flips the sign of odd ones
/// (so parity_project(|alpha>, minus) = -1/2 (|alpha> - |-alpha>)). The minus
/// branch squares to its own negative; see the operator algebra tests.
FieldState parity_project(const FieldState& state, CatSign sign);

/// D(beta) = exp(beta a† - beta* a) as the truncated matrix exponential,
/// exact phases included: on a coherent |alpha> this is
/// e^{i Im(beta alpha*)} |alpha + beta>. Rejects displacements whose
/// |alpha| + |beta| envelope no longer fits the cutoff.
FieldState displace(const FieldState& state, Complex beta);

/// Analytic coherent-shift route for the same operation; must agree with
/// displace() on coherent inputs to 1e-10 at adequate cutoffs.
FieldState coherent_shift(Complex alpha, Complex beta, int truncation, double tail_tol = 1e-12);

/// The unitary matrix of D(beta) on the truncated space.
Matrix displacement_operator(int truncation, Complex beta);

/// sum_n conj(a_n) b_n. Truncations must match.
Complex inner(const FieldState& a, const FieldState& b);

/// |<a|b>|^2 / (|a|^2 |b|^2)
double fidelity(const FieldState& a, const FieldState& b);

}  // namespace qslit
