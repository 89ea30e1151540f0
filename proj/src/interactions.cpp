#include "qslit/interactions.hpp"

#include <cmath>

namespace qslit {

InteractionParams InteractionParams::dispersive(double g, double delta, double tau) {
    if (delta == 0.0)
        fail(ErrorCode::invariant_violation, "dispersive interaction requires delta != 0");
    InteractionParams p;
    p.g = g;
    p.delta = delta;
    p.tau = tau;
    p.phi = 2.0 * g * g * tau / delta;
    return p;
}

AtomFieldJoint joint_product(const Vector& atom, const FieldState& field) {
    return atom * field.amps.transpose();
}

AtomFieldJoint dispersive_lambda(const AtomFieldJoint& joint, double phi) {
    if (joint.rows() != 3)
        fail(ErrorCode::layout_mismatch, "dispersive_lambda expects a 3-level joint");
    AtomFieldJoint out(3, joint.cols());
    for (Eigen::Index n = 0; n < joint.cols(); ++n) {
        const Complex p = phase_factor(phi, n);
        const Complex diag = (p + 1.0) / 2.0;
        const Complex off = (p - 1.0) / 2.0;
        out(lambda_level_a, n) = -p * joint(lambda_level_a, n);
        out(lambda_level_b, n) = diag * joint(lambda_level_b, n) + off * joint(lambda_level_c, n);
        out(lambda_level_c, n) = off * joint(lambda_level_b, n) + diag * joint(lambda_level_c, n);
    }
    return out;
}

AtomFieldJoint jc_evolve(const AtomFieldJoint& joint, double gt) {
    if (joint.rows() != 2)
        fail(ErrorCode::layout_mismatch, "jc_evolve expects a 2-level joint");
    AtomFieldJoint out = joint;
    const Complex mi(0.0, -1.0);
    for (Eigen::Index n = 1; n < joint.cols(); ++n) {
        const double angle = gt * std::sqrt(double(n));
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        const Complex f = joint(probe_level_f, n);
        const Complex e = joint(probe_level_e, n - 1);
        out(probe_level_f, n) = c * f + mi * s * e;
        out(probe_level_e, n - 1) = mi * s * f + c * e;
    }
    return out;
}

double jc_excitation_probability(const FieldState& field, double gt) {
    if (!field.is_normalized(1e-10))
        fail(ErrorCode::unnormalized_input, "jc_excitation_probability needs a normalized field");
    double p = 0.0;
    for (int n = 0; n < field.truncation(); ++n) {
        const double s = std::sin(gt * std::sqrt(double(n + 1)));
        p += std::norm(field.amps[n + 1]) * s * s;
    }
    return p;
}

}  // namespace qslit
