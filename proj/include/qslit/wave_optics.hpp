#pragma once

#include <array>
#include <limits>

#include "qslit/branch.hpp"

namespace qslit {

/// One slit screen: two Gaussian apertures of width `width` at `centers`,
/// with `distance` the flight length to the next plane.
struct SlitStage {
    std::array<double, 2> centers{0.0, 0.0};
    double width = 1.0;
    double distance = 1.0;
};

struct SlitGeometry {
    std::vector<SlitStage> stages;
    double mass = 1.0;
    double velocity = 1.0;
    double hbar = 1.0;

    double elapsed(std::size_t stage) const;
    double de_broglie_wavelength() const { return 2.0 * pi * hbar / (mass * velocity); }
    /// rms spread of a propagated aperture: width * sqrt(1 + (hbar t / 2 m width^2)^2)
    double spread(std::size_t stage) const;
};

struct ScreenDistribution {
    RealVector xs;
    RealVector density;     // raw |Psi|^2, as produced by the quantum state
    RealVector normalized;  // density / trapezoid integral over the grid
    RealVector envelope;    // the no-interference part (diagonal Gram terms)
    int path_count = 0;
    bool normalized_flag = false;
    double visibility = std::numeric_limits<double>::quiet_NaN();
};

struct Window {
    double lo;
    double hi;
};

enum class TransferMode { point_sample, aperture_overlap };

/// Free evolution of a unit-norm Gaussian released from a slit:
///   psi(x,t) = (2 pi s^2)^{-1/4} tau^{-1/2} exp(-(x-center)^2 / (4 s^2 tau)),
///   tau = 1 + i hbar t / (2 m s^2).
/// Exact closed form; the L2 norm stays 1 for all t > 0.
Complex slit_amplitude(const SlitGeometry& geometry, std::size_t stage, int slit, double x,
                       double elapsed);

/// |Psi(x)|^2 = sum_{pq} P_pq psi_p(x) psi_q*(x) with P the path-block Gram of
/// the composite state. Negative round-off below 1e-12 is clipped to zero;
/// anything more negative raises. Honors QSLIT_THREADS for the grid loop.
ScreenDistribution screen_density(const CompositeState& state, const SlitGeometry& geometry,
                                  const RealVector& xs);

/// Fringe contrast: average (max-min)/(max+min) over consecutive extrema of
/// the envelope-normalized density inside the window. A distribution with a
/// single contributing path has no fringes and raises insufficient-extrema;
/// a flat ratio (no cross term) returns its global contrast, i.e. ~0.
double visibility(const ScreenDistribution& dist, const Window& window);

/// Stage-1 -> stage-2 transfer amplitude psi_{zeta_src}(eta_dst, t1).
/// point_sample evaluates the propagated wave at the slit center; drops
/// aperture_overlap integrates it against the stage-2 aperture Gaussian
/// (closed form).
Complex four_slit_transfer(const SlitGeometry& geometry, int source_slit, int dest_slit,
                           TransferMode mode = TransferMode::point_sample);

/// Two-stage cascade density: per-branch amplitudes
///   T_p(x) = sum_j psi_{zeta_p}(eta_j, t1) psi_{eta_j}(x, t2)
/// contracted with the path Gram. The stored envelope is diagonal in both the
/// stage-1 path and the stage-2 slit, so the cross term carries all
/// interference.
ScreenDistribution four_slit_density(const CompositeState& state, const SlitGeometry& geometry,
                                     const RealVector& xs,
                                     TransferMode mode = TransferMode::point_sample);

RealVector linspaced_grid(int points, double half_width);
double trapezoid(const RealVector& xs, const RealVector& ys);

}  // namespace qslit
