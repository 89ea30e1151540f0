#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>

namespace qslit {

using Scalar = double;
using Complex = std::complex<Scalar>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi_v<double>;

inline bool is_finite(Complex z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

inline bool all_finite(const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!is_finite(v[i])) return false;
    return true;
}

/// e^{i phi n} with the parity point phi = ±pi mapped to an exact (-1)^n,
/// so that projector identities hold without rounding in the phase.
inline Complex phase_factor(double phi, Eigen::Index n) {
    if (phi == 0.0) return Complex(1.0, 0.0);
    if (phi == pi || phi == -pi) return (n % 2 == 0) ? Complex(1.0, 0.0) : Complex(-1.0, 0.0);
    return std::polar(1.0, phi * static_cast<double>(n));
}

}  // namespace qslit
