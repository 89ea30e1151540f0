#include "qslit/fock.hpp"

#include <cmath>

namespace qslit {

double coherent_tail_mass(double amplitude, int truncation) {
    if (amplitude == 0.0) return 0.0;
    const double a2 = amplitude * amplitude;
    // first tail term e^{-a^2} a^{2(N+1)} / (N+1)!, then the term recurrence
    double term = std::exp(-a2 + 2.0 * (truncation + 1) * std::log(amplitude) -
                           std::lgamma(truncation + 2.0));
    double sum = 0.0;
    int n = truncation + 1;
    while (term > 1e-25 * (sum + 1e-300) && n < truncation + 2000) {
        sum += term;
        ++n;
        term *= a2 / n;
    }
    return sum;
}

int default_truncation(double max_amplitude) {
    const double doubled = 2.0 * max_amplitude;
    return static_cast<int>(std::ceil(4.0 * doubled * doubled + 20.0));
}

FieldState make_coherent(Complex alpha, int truncation, double tail_tol) {
    if (truncation < 0) fail(ErrorCode::cutoff_too_small, "truncation must be >= 0");
    const double tail = coherent_tail_mass(std::abs(alpha), truncation);
    if (tail >= tail_tol)
        fail(ErrorCode::cutoff_too_small,
             "coherent tail mass " + std::to_string(tail) + " exceeds tolerance at truncation " +
                 std::to_string(truncation));
    FieldState f;
    f.amps = Vector::Zero(truncation + 1);
    f.amps[0] = std::exp(-std::norm(alpha) / 2.0);
    for (int n = 1; n <= truncation; ++n) f.amps[n] = f.amps[n - 1] * alpha / std::sqrt(double(n));
    f.envelope = std::abs(alpha);
    f.tail_tol = tail_tol;
    return f;
}

FieldState vacuum_state(int truncation) { return make_coherent(0.0, truncation); }

FieldState make_cat(Complex alpha, CatSign sign, int truncation, bool normalize, double tail_tol) {
    if (sign == CatSign::minus && alpha == Complex(0.0, 0.0))
        fail(ErrorCode::degenerate_cat, "|0> - |0> is the zero vector");
    FieldState plus = make_coherent(alpha, truncation, tail_tol);
    FieldState minus = make_coherent(-alpha, truncation, tail_tol);
    FieldState f;
    f.amps = (sign == CatSign::plus) ? Vector(plus.amps + minus.amps)
                                     : Vector(plus.amps - minus.amps);
    if (normalize) {
        const double overlap = std::exp(-2.0 * std::norm(alpha));
        const double n2 = 2.0 * (sign == CatSign::plus ? 1.0 + overlap : 1.0 - overlap);
        f.amps /= std::sqrt(n2);
    }
    f.envelope = std::abs(alpha);
    f.tail_tol = tail_tol;
    return f;
}

FieldState apply_number_phase(const FieldState& state, double phi) {
    FieldState out = state;
    for (Eigen::Index n = 0; n < out.amps.size(); ++n) out.amps[n] *= phase_factor(phi, n);
    return out;
}

FieldState parity_project(const FieldState& state, CatSign sign) {
    FieldState out = state;
    if (sign == CatSign::plus) {
        for (Eigen::Index n = 1; n < out.amps.size(); n += 2) out.amps[n] = Complex(0.0, 0.0);
    } else {
        for (Eigen::Index n = 0; n < out.amps.size(); n += 2) out.amps[n] = Complex(0.0, 0.0);
        for (Eigen::Index n = 1; n < out.amps.size(); n += 2) out.amps[n] = -out.amps[n];
    }
    return out;
}

Matrix displacement_operator(int truncation, Complex beta) {
    const int dim = truncation + 1;
    // H = i (beta a† - beta* a) is Hermitian; D = exp(-i H)
    Matrix h = Matrix::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) {
        const double root = std::sqrt(double(n));
        h(n, n - 1) = Complex(0.0, 1.0) * beta * root;
        h(n - 1, n) = Complex(0.0, -1.0) * std::conj(beta) * root;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    const auto& vecs = solver.eigenvectors();
    const auto& vals = solver.eigenvalues();
    Matrix phases = Matrix::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) phases(k, k) = std::polar(1.0, -vals[k]);
    return vecs * phases * vecs.adjoint();
}

FieldState displace(const FieldState& state, Complex beta) {
    if (beta == Complex(0.0, 0.0)) return state;
    FieldState out = state;
    if (!std::isnan(state.envelope)) {
        const double grown = state.envelope + std::abs(beta);
        const double tail = coherent_tail_mass(grown, state.truncation());
        if (tail >= state.tail_tol)
            fail(ErrorCode::cutoff_too_small,
                 "post-displacement envelope " + std::to_string(grown) +
                     " has tail mass " + std::to_string(tail) + " at truncation " +
                     std::to_string(state.truncation()));
        out.envelope = grown;
    }
    out.amps = displacement_operator(state.truncation(), beta) * state.amps;
    return out;
}

FieldState coherent_shift(Complex alpha, Complex beta, int truncation, double tail_tol) {
    FieldState out = make_coherent(alpha + beta, truncation, tail_tol);
    out.amps *= std::polar(1.0, std::imag(beta * std::conj(alpha)));
    return out;
}

Complex inner(const FieldState& a, const FieldState& b) {
    if (a.amps.size() != b.amps.size())
        fail(ErrorCode::truncation_mismatch, "field truncations differ");
    return a.amps.dot(b.amps);
}

double fidelity(const FieldState& a, const FieldState& b) {
    const double n2 = a.norm2() * b.norm2();
    if (n2 == 0.0) return 0.0;
    return std::norm(inner(a, b)) / n2;
}

}  // namespace qslit
