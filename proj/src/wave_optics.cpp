#include "qslit/wave_optics.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

namespace qslit {

namespace {

void check_geometry(const SlitGeometry& g) {
    if (g.stages.empty()) fail(ErrorCode::layout_mismatch, "geometry has no stages");
    for (const auto& s : g.stages) {
        if (!(s.width > 0.0)) fail(ErrorCode::invariant_violation, "slit width must be > 0");
        if (!(s.distance > 0.0)) fail(ErrorCode::invariant_violation, "stage distance must be > 0");
    }
    if (!(g.mass > 0.0) || !(g.velocity > 0.0) || !(g.hbar > 0.0))
        fail(ErrorCode::invariant_violation, "mass, velocity and hbar must be > 0");
}

int density_threads(Eigen::Index points) {
    const char* env = std::getenv("QSLIT_THREADS");
    unsigned t = 0;
    if (env && *env) t = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
    if (t == 0) t = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<int>(std::min<Eigen::Index>(t, std::max<Eigen::Index>(1, points / 64)));
}

/// Evaluate density and envelope on the grid given per-path amplitude
/// functions. Each grid point is independent, so the result is bitwise
/// identical for any thread count.
template <typename AmpFn>
void fill_density(const RealVector& xs, const Matrix& pg, AmpFn amps_at, RealVector& density,
                  RealVector& envelope) {
    const Eigen::Index n = xs.size();
    const int paths = static_cast<int>(pg.rows());
    density.resize(n);
    envelope.resize(n);
    auto eval_point = [&](Eigen::Index i) {
        std::vector<Complex> a(paths);
        amps_at(xs[i], a);
        double diag = 0.0;
        for (int p = 0; p < paths; ++p) diag += pg(p, p).real() * std::norm(a[p]);
        double cross = 0.0;
        for (int p = 0; p < paths; ++p)
            for (int q = p + 1; q < paths; ++q)
                cross += 2.0 * std::real(pg(p, q) * a[p] * std::conj(a[q]));
        envelope[i] = diag;
        density[i] = diag + cross;
    };
    const int threads = density_threads(n);
    if (threads <= 1) {
        for (Eigen::Index i = 0; i < n; ++i) eval_point(i);
    } else {
        std::vector<std::thread> pool;
        const Eigen::Index chunk = (n + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const Eigen::Index lo = t * chunk;
            const Eigen::Index hi = std::min(n, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&, lo, hi] {
                for (Eigen::Index i = lo; i < hi; ++i) eval_point(i);
            });
        }
        for (auto& th : pool) th.join();
    }
}

void finalize_distribution(ScreenDistribution& dist, const Matrix& pg) {
    for (Eigen::Index i = 0; i < dist.density.size(); ++i) {
        if (dist.density[i] < 0.0) {
            if (dist.density[i] <= -1e-12)
                fail(ErrorCode::internal_error,
                     "density " + std::to_string(dist.density[i]) + " below round-off floor");
            dist.density[i] = 0.0;
        }
    }
    // path weights at truncation-round-off scale do not count as contributing
    double diag_max = 0.0;
    for (Eigen::Index p = 0; p < pg.rows(); ++p) diag_max = std::max(diag_max, pg(p, p).real());
    int paths = 0;
    for (Eigen::Index p = 0; p < pg.rows(); ++p)
        if (pg(p, p).real() > 1e-20 * diag_max) ++paths;
    dist.path_count = paths;
    const double integral = trapezoid(dist.xs, dist.density);
    if (integral > 0.0) {
        dist.normalized = dist.density / integral;
        dist.normalized_flag = true;
    } else {
        dist.normalized = dist.density;
        dist.normalized_flag = false;
    }
}

}  // namespace

double SlitGeometry::elapsed(std::size_t stage) const {
    return stages.at(stage).distance / velocity;
}

double SlitGeometry::spread(std::size_t stage) const {
    const double s = stages.at(stage).width;
    const double tau = hbar * elapsed(stage) / (2.0 * mass * s * s);
    return s * std::sqrt(1.0 + tau * tau);
}

Complex slit_amplitude(const SlitGeometry& geometry, std::size_t stage, int slit, double x,
                       double elapsed) {
    check_geometry(geometry);
    if (!(elapsed > 0.0)) fail(ErrorCode::nonpositive_time, "elapsed time must be > 0");
    const auto& st = geometry.stages.at(stage);
    const double s = st.width;
    const double center = st.centers.at(slit);
    const Complex tau(1.0, geometry.hbar * elapsed / (2.0 * geometry.mass * s * s));
    const double dx = x - center;
    return std::pow(2.0 * pi * s * s, -0.25) / std::sqrt(tau) *
           std::exp(-dx * dx / (4.0 * s * s * tau));
}

ScreenDistribution screen_density(const CompositeState& state, const SlitGeometry& geometry,
                                  const RealVector& xs) {
    check_geometry(geometry);
    if (state.layout.path_labels.size() != 2)
        fail(ErrorCode::layout_mismatch, "screen_density expects 2 path labels");
    const Matrix pg = path_gram(state);
    const double t1 = geometry.elapsed(0);

    ScreenDistribution dist;
    dist.xs = xs;
    fill_density(
        xs, pg,
        [&](double x, std::vector<Complex>& a) {
            for (int p = 0; p < 2; ++p) a[p] = slit_amplitude(geometry, 0, p, x, t1);
        },
        dist.density, dist.envelope);
    finalize_distribution(dist, pg);
    return dist;
}

double visibility(const ScreenDistribution& dist, const Window& window) {
    if (dist.path_count < 2)
        fail(ErrorCode::insufficient_extrema,
             "fewer than two contributing paths, no fringes can exist");
    std::vector<double> ratio;
    ratio.reserve(dist.xs.size());
    double env_max = dist.envelope.maxCoeff();
    for (Eigen::Index i = 0; i < dist.xs.size(); ++i) {
        if (dist.xs[i] < window.lo || dist.xs[i] > window.hi) continue;
        if (dist.envelope[i] <= 1e-300 * env_max) continue;
        ratio.push_back(dist.density[i] / dist.envelope[i]);
    }
    if (ratio.size() < 8)
        fail(ErrorCode::insufficient_extrema, "window holds too few grid points");

    const double rmax = *std::max_element(ratio.begin(), ratio.end());
    const double rmin = *std::min_element(ratio.begin(), ratio.end());
    if (rmax - rmin <= 1e-12 * std::max(1.0, std::abs(rmax)))
        return (rmax + rmin) == 0.0 ? 0.0 : (rmax - rmin) / (rmax + rmin);

    // direction-change walk; a plateau (equal neighbors, e.g. a peak centered
    // between two samples of a symmetric grid) counts as one extremum
    std::vector<double> extrema;
    int last_dir = 0;
    for (std::size_t i = 1; i < ratio.size(); ++i) {
        const double diff = ratio[i] - ratio[i - 1];
        const int dir = (diff > 0.0) - (diff < 0.0);
        if (dir == 0) continue;
        if (last_dir != 0 && dir != last_dir) extrema.push_back(ratio[i - 1]);
        last_dir = dir;
    }
    if (extrema.size() < 3)
        fail(ErrorCode::insufficient_extrema,
             "window contains " + std::to_string(extrema.size()) + " extrema, need >= 3");
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < extrema.size(); ++k)
        acc += std::abs(extrema[k] - extrema[k + 1]) / (extrema[k] + extrema[k + 1]);
    return acc / static_cast<double>(extrema.size() - 1);
}

Complex four_slit_transfer(const SlitGeometry& geometry, int source_slit, int dest_slit,
                           TransferMode mode) {
    check_geometry(geometry);
    if (geometry.stages.size() < 2)
        fail(ErrorCode::single_stage_geometry, "four-slit transfer needs two stages");
    const double t1 = geometry.elapsed(0);
    const double eta = geometry.stages[1].centers.at(dest_slit);
    if (mode == TransferMode::point_sample)
        return slit_amplitude(geometry, 0, source_slit, eta, t1);

    // overlap of the propagated stage-1 Gaussian with the stage-2 aperture:
    // integral of B exp(-a y^2 + b y + c) dy = B sqrt(pi/a) exp(b^2/(4a) + c)
    const double s1 = geometry.stages[0].width;
    const double s2 = geometry.stages[1].width;
    const double zeta = geometry.stages[0].centers.at(source_slit);
    const Complex tau(1.0, geometry.hbar * t1 / (2.0 * geometry.mass * s1 * s1));
    const Complex prefactor = std::pow(2.0 * pi * s1 * s1, -0.25) / std::sqrt(tau) *
                              std::pow(2.0 * pi * s2 * s2, -0.25);
    const Complex a = 1.0 / (4.0 * s2 * s2) + 1.0 / (4.0 * s1 * s1 * tau);
    const Complex b = eta / (2.0 * s2 * s2) + zeta / (2.0 * s1 * s1 * tau);
    const Complex c = -eta * eta / (4.0 * s2 * s2) - zeta * zeta / (4.0 * s1 * s1 * tau);
    return prefactor * std::sqrt(pi / a) * std::exp(b * b / (4.0 * a) + c);
}

ScreenDistribution four_slit_density(const CompositeState& state, const SlitGeometry& geometry,
                                     const RealVector& xs, TransferMode mode) {
    check_geometry(geometry);
    if (geometry.stages.size() < 2)
        fail(ErrorCode::single_stage_geometry, "four-slit density needs two stages");
    if (state.layout.path_labels.size() != 2)
        fail(ErrorCode::layout_mismatch, "four_slit_density expects 2 path labels");

    const Matrix pg = path_gram(state);
    const double t2 = geometry.elapsed(1);
    Matrix transfer(2, 2);
    for (int p = 0; p < 2; ++p)
        for (int j = 0; j < 2; ++j) transfer(p, j) = four_slit_transfer(geometry, p, j, mode);

    ScreenDistribution dist;
    dist.xs = xs;
    const Eigen::Index n = xs.size();
    dist.density.resize(n);
    dist.envelope.resize(n);
    // envelope stays diagonal in the stage-2 slit as well, so the cross term
    // carries the eta-stage interference even for a single surviving path
    for (Eigen::Index i = 0; i < n; ++i) {
        std::array<Complex, 2> eta_amp{slit_amplitude(geometry, 1, 0, xs[i], t2),
                                       slit_amplitude(geometry, 1, 1, xs[i], t2)};
        double diag = 0.0;
        for (int p = 0; p < 2; ++p)
            for (int j = 0; j < 2; ++j)
                diag += pg(p, p).real() * std::norm(transfer(p, j)) * std::norm(eta_amp[j]);
        Complex full(0.0, 0.0);
        std::array<Complex, 2> t_amp{transfer(0, 0) * eta_amp[0] + transfer(0, 1) * eta_amp[1],
                                     transfer(1, 0) * eta_amp[0] + transfer(1, 1) * eta_amp[1]};
        for (int p = 0; p < 2; ++p)
            for (int q = 0; q < 2; ++q) full += pg(p, q) * t_amp[p] * std::conj(t_amp[q]);
        dist.envelope[i] = diag;
        dist.density[i] = full.real();
    }
    finalize_distribution(dist, pg);
    return dist;
}

RealVector linspaced_grid(int points, double half_width) {
    if (points < 2) fail(ErrorCode::invariant_violation, "grid needs at least 2 points");
    return RealVector::LinSpaced(points, -half_width, half_width);
}

double trapezoid(const RealVector& xs, const RealVector& ys) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i + 1 < xs.size(); ++i)
        acc += 0.5 * (ys[i] + ys[i + 1]) * (xs[i + 1] - xs[i]);
    return acc;
}

}  // namespace qslit
