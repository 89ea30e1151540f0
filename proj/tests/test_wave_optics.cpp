#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qslit/wave_optics.hpp"

using namespace qslit;

namespace {

SlitGeometry default_geometry(double separation = 10.0, double length = 100.0) {
    SlitGeometry g;
    g.stages.push_back({{-separation / 2.0, separation / 2.0}, 1.0, length});
    return g;
}

SlitGeometry two_stage_geometry(double d1, double l1, double d2, double l2) {
    SlitGeometry g;
    g.stages.push_back({{-d1 / 2.0, d1 / 2.0}, 1.0, l1});
    g.stages.push_back({{-d2 / 2.0, d2 / 2.0}, 1.0, l2});
    return g;
}

SystemLayout slit_layout(int truncation) {
    SystemLayout l;
    l.path_labels = {"zeta1", "zeta2"};
    l.atoms.push_back({"A1", AtomKind::lambda});
    l.cavities.push_back({"C1", truncation});
    l.cavities.push_back({"C2", truncation});
    l.path_cavity = {{"zeta1", "C1"}, {"zeta2", "C2"}};
    return l;
}

CompositeState coherent_superposition(int n) {
    return init_double_slit(slit_layout(n), {make_coherent(1.0, n), make_coherent(1.0, n)}, "b");
}

CompositeState cat_marked_state(int n) {
    CompositeState s = init_double_slit(
        slit_layout(n),
        {make_cat(1.0, CatSign::plus, n, true), make_cat(1.0, CatSign::minus, n, true)}, "b");
    s = apply_cavity_interaction(s, "C1", "A1", pi);
    s = apply_cavity_interaction(s, "C2", "A1", pi);
    return s;
}

// Fresnel propagator quadrature: psi(x,t) = integral K(x,y;t) psi0(y) dy with
// K = sqrt(m/(2 pi i hbar t)) exp(i m (x-y)^2 / (2 hbar t)). Simpson rule over
// the aperture support.
Complex fresnel_oracle(const SlitGeometry& g, std::size_t stage, int slit, double x,
                       double elapsed) {
    const double s = g.stages[stage].width;
    const double center = g.stages[stage].centers[slit];
    const int steps = 40000;  // even
    const double lo = center - 12.0 * s;
    const double hi = center + 12.0 * s;
    const double h = (hi - lo) / steps;
    const Complex kernel_norm =
        std::sqrt(g.mass / (2.0 * pi * Complex(0.0, 1.0) * g.hbar * elapsed));
    auto integrand = [&](double y) {
        const Complex phase =
            std::exp(Complex(0.0, 1.0) * g.mass * (x - y) * (x - y) / (2.0 * g.hbar * elapsed));
        const double aperture =
            std::pow(2.0 * pi * s * s, -0.25) * std::exp(-(y - center) * (y - center) / (4 * s * s));
        return phase * aperture;
    };
    Complex acc = integrand(lo) + integrand(hi);
    for (int k = 1; k < steps; ++k) acc += integrand(lo + k * h) * (k % 2 ? 4.0 : 2.0);
    return kernel_norm * acc * h / 3.0;
}

}  // namespace

TEST_CASE("slit amplitude: early-time peak sits at the slit center") {
    const SlitGeometry g = default_geometry();
    const double t = 1e-6;
    const double at_center = std::norm(slit_amplitude(g, 0, 0, -5.0, t));
    for (const double x : {-7.0, -5.5, -4.5, -3.0, 0.0})
        CHECK(std::norm(slit_amplitude(g, 0, 0, x, t)) <= at_center);
    CHECK_THROWS_AS(slit_amplitude(g, 0, 0, 0.0, 0.0), Error);
}

TEST_CASE("slit amplitude stays unit-norm under free propagation") {
    const SlitGeometry g = default_geometry();
    for (const double t : {0.5, 10.0, 100.0, 400.0}) {
        const double spread = 1.0 * std::sqrt(1.0 + std::pow(t / 2.0, 2));
        const RealVector xs = linspaced_grid(40001, 5.0 + 12.0 * spread);
        RealVector dens(xs.size());
        for (Eigen::Index i = 0; i < xs.size(); ++i)
            dens[i] = std::norm(slit_amplitude(g, 0, 0, xs[i], t));
        CHECK(std::abs(trapezoid(xs, dens) - 1.0) < 1e-9);
    }
}

TEST_CASE("slit amplitude agrees with the Fresnel propagator quadrature") {
    const SlitGeometry g = default_geometry();
    const double t = 40.0;
    for (const double x : {-20.0, -5.0, 0.0, 13.0}) {
        const Complex closed = slit_amplitude(g, 0, 0, x, t);
        const Complex quad = fresnel_oracle(g, 0, 0, x, t);
        CHECK(std::abs(closed - quad) < 1e-8);
    }
}

TEST_CASE("far-field fringe spacing approaches lambda L over d") {
    // d = 100 sigma keeps many fringes inside the envelope, so raw maxima are
    // envelope-shifted by far less than the 2% budget
    const SlitGeometry g = default_geometry(100.0, 100.0);
    const CompositeState two_path = coherent_superposition(16);
    const RealVector xs = linspaced_grid(40001, 40.0);
    const ScreenDistribution dist = screen_density(two_path, g, xs);

    std::vector<double> maxima;
    for (Eigen::Index i = 1; i + 1 < xs.size(); ++i) {
        if (dist.density[i] > dist.density[i - 1] && dist.density[i] > dist.density[i + 1]) {
            const double y0 = dist.density[i - 1], y1 = dist.density[i], y2 = dist.density[i + 1];
            const double dx = xs[1] - xs[0];
            maxima.push_back(xs[i] + 0.5 * dx * (y0 - y2) / (y0 - 2 * y1 + y2));
        }
    }
    REQUIRE(maxima.size() >= 4);
    double spacing = 0.0;
    for (std::size_t k = 0; k + 1 < maxima.size(); ++k) spacing += maxima[k + 1] - maxima[k];
    spacing /= static_cast<double>(maxima.size() - 1);
    const double expected = g.de_broglie_wavelength() * 100.0 / 100.0;
    CHECK(std::abs(spacing - expected) / expected < 0.02);
}

TEST_CASE("screen density of the washed-out state is the incoherent two-hump sum") {
    const int n = 24;
    const CompositeState cats = cat_marked_state(n);
    const SlitGeometry g = default_geometry();
    const RealVector xs = linspaced_grid(2048, 250.0);
    const ScreenDistribution dist = screen_density(cats, g, xs);

    const double t1 = g.elapsed(0);
    for (Eigen::Index i = 0; i < xs.size(); i += 37) {
        const double expect = 0.5 * std::norm(slit_amplitude(g, 0, 0, xs[i], t1)) +
                              0.5 * std::norm(slit_amplitude(g, 0, 1, xs[i], t1));
        CHECK(dist.density[i] == doctest::Approx(expect).epsilon(1e-11));
    }
    // no cross term at all: the density equals its own envelope bitwise
    CHECK((dist.density - dist.envelope).norm() == 0.0);
    CHECK(visibility(dist, Window{-125.0, 125.0}) < 1e-12);
}

TEST_CASE("visibility: full-contrast fringes without cavities, error on one slit") {
    const int n = 16;
    const CompositeState two_path = coherent_superposition(n);
    const SlitGeometry g = default_geometry();
    const RealVector xs = linspaced_grid(2048, 250.0);
    ScreenDistribution dist = screen_density(two_path, g, xs);
    CHECK(visibility(dist, Window{-125.0, 125.0}) > 0.9);

    CompositeState one_path = two_path;
    one_path.branches.pop_back();
    const ScreenDistribution single = screen_density(one_path, g, xs);
    CHECK(single.path_count == 1);
    CHECK_THROWS_AS(visibility(single, Window{-125.0, 125.0}), Error);
    try {
        visibility(single, Window{-125.0, 125.0});
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::insufficient_extrema);
    }
}

TEST_CASE("single-path density reduces to that path's propagated Gaussian") {
    const int n = 16;
    CompositeState one_path = coherent_superposition(n);
    one_path.branches.erase(one_path.branches.begin());  // keep zeta2
    const SlitGeometry g = default_geometry();
    const RealVector xs = linspaced_grid(1024, 250.0);
    const ScreenDistribution dist = screen_density(one_path, g, xs);
    const double t1 = g.elapsed(0);
    const double weight = path_gram(one_path)(1, 1).real();
    for (Eigen::Index i = 0; i < xs.size(); i += 11) {
        const double expect = weight * std::norm(slit_amplitude(g, 0, 1, xs[i], t1));
        CHECK(std::abs(dist.density[i] - expect) <= 1e-13 * std::max(1.0, expect));
    }
}

TEST_CASE("density evaluation is bitwise independent of the thread count") {
    const CompositeState two_path = coherent_superposition(16);
    const SlitGeometry g = default_geometry();
    const RealVector xs = linspaced_grid(4096, 250.0);

    setenv("QSLIT_THREADS", "1", 1);
    const ScreenDistribution serial = screen_density(two_path, g, xs);
    setenv("QSLIT_THREADS", "5", 1);
    const ScreenDistribution threaded = screen_density(two_path, g, xs);
    unsetenv("QSLIT_THREADS");

    REQUIRE(serial.density.size() == threaded.density.size());
    for (Eigen::Index i = 0; i < serial.density.size(); ++i) {
        CHECK(serial.density[i] == threaded.density[i]);
        CHECK(serial.envelope[i] == threaded.envelope[i]);
    }
}

TEST_CASE("normalized distributions integrate to one") {
    const CompositeState cats = cat_marked_state(16);
    const SlitGeometry g = default_geometry();
    const RealVector xs = linspaced_grid(2048, 250.0);
    const ScreenDistribution dist = screen_density(cats, g, xs);
    CHECK(dist.normalized_flag);
    CHECK(std::abs(trapezoid(dist.xs, dist.normalized) - 1.0) < 1e-6);
}

TEST_CASE("four-slit transfer: sharp separation, mirror symmetry, aperture oracle") {
    // sharp: negligible spreading over L1 and 14-sigma separation
    const SlitGeometry sharp = two_stage_geometry(14.0, 0.02, 14.0, 100.0);
    CHECK(std::abs(four_slit_transfer(sharp, 0, 1)) < 1e-12);
    CHECK(std::abs(four_slit_transfer(sharp, 1, 0)) < 1e-12);
    CHECK(four_slit_transfer(sharp, 0, 0) == four_slit_transfer(sharp, 1, 1));

    CHECK_THROWS_AS(four_slit_transfer(default_geometry(), 0, 1), Error);

    // overlapping regime: the point-sample transfer equals the Fresnel quadrature
    const SlitGeometry overlap = two_stage_geometry(10.0, 100.0, 10.0, 100.0);
    for (int src = 0; src < 2; ++src)
        for (int dst = 0; dst < 2; ++dst) {
            const Complex got = four_slit_transfer(overlap, src, dst);
            const Complex quad = fresnel_oracle(
                overlap, 0, src, overlap.stages[1].centers[dst], overlap.elapsed(0));
            CHECK(std::abs(got - quad) < 1e-8);
        }

    // aperture mode matches a direct overlap quadrature of the two Gaussians
    const double t1 = overlap.elapsed(0);
    for (int src = 0; src < 2; ++src)
        for (int dst = 0; dst < 2; ++dst) {
            const Complex got =
                four_slit_transfer(overlap, src, dst, TransferMode::aperture_overlap);
            const double eta = overlap.stages[1].centers[dst];
            const double s2 = overlap.stages[1].width;
            const int steps = 40000;
            const double lo = eta - 14.0 * s2, hi = eta + 14.0 * s2;
            const double h = (hi - lo) / steps;
            auto integrand = [&](double y) {
                const double g2 = std::pow(2.0 * pi * s2 * s2, -0.25) *
                                  std::exp(-(y - eta) * (y - eta) / (4.0 * s2 * s2));
                return g2 * slit_amplitude(overlap, 0, src, y, t1);
            };
            Complex acc = integrand(lo) + integrand(hi);
            for (int k = 1; k < steps; ++k) acc += integrand(lo + k * h) * (k % 2 ? 4.0 : 2.0);
            CHECK(std::abs(got - acc * h / 3.0) < 1e-10);
        }
}

TEST_CASE("four-slit density: sharp peaks suppress the cross term") {
    const int n = 16;
    const CompositeState cats = cat_marked_state(n);
    const SlitGeometry sharp = two_stage_geometry(14.0, 0.02, 14.0, 100.0);
    const RealVector xs = linspaced_grid(2048, 260.0);
    const ScreenDistribution dist = four_slit_density(cats, sharp, xs);

    double cross_max = 0.0;
    for (Eigen::Index i = 0; i < xs.size(); ++i)
        cross_max = std::max(cross_max, std::abs(dist.density[i] - dist.envelope[i]));
    CHECK(cross_max < 1e-10 * dist.envelope.maxCoeff());

    // density equals the no-interference closed form
    const Matrix pg = path_gram(cats);
    const double t2 = sharp.elapsed(1);
    for (Eigen::Index i = 0; i < xs.size(); i += 29) {
        double expect = 0.0;
        for (int p = 0; p < 2; ++p)
            for (int j = 0; j < 2; ++j)
                expect += pg(p, p).real() * std::norm(four_slit_transfer(sharp, p, j)) *
                          std::norm(slit_amplitude(sharp, 1, j, xs[i], t2));
        CHECK(dist.density[i] == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("four-slit density: overlapping regime matches the direct cascade formula") {
    const int n = 16;
    const CompositeState cats = cat_marked_state(n);
    const SlitGeometry overlap = two_stage_geometry(10.0, 100.0, 10.0, 100.0);
    const RealVector xs = linspaced_grid(2048, 260.0);
    const ScreenDistribution dist = four_slit_density(cats, overlap, xs);

    // direct evaluation: per-path 1/2 |sum_j t_pj psi_eta_j(x)|^2, expanded into
    // direct terms plus the eta-stage cross term
    const double t2 = overlap.elapsed(1);
    Matrix t(2, 2);
    for (int p = 0; p < 2; ++p)
        for (int j = 0; j < 2; ++j) t(p, j) = four_slit_transfer(overlap, p, j);
    double scale = 0.0;
    for (Eigen::Index i = 0; i < xs.size(); ++i) scale = std::max(scale, dist.density[i]);
    double cross_max = 0.0;
    for (Eigen::Index i = 0; i < xs.size(); ++i) {
        const Complex e1 = slit_amplitude(overlap, 1, 0, xs[i], t2);
        const Complex e2 = slit_amplitude(overlap, 1, 1, xs[i], t2);
        double direct = 0.0;
        for (int p = 0; p < 2; ++p)
            direct += 0.5 * (std::norm(t(p, 0)) * std::norm(e1) + std::norm(t(p, 1)) * std::norm(e2));
        const Complex pair =
            (std::conj(t(0, 0)) * t(0, 1) + std::conj(t(1, 0)) * t(1, 1)) * std::conj(e1) * e2;
        const double expect = direct + 2.0 * std::real(pair) * 0.5;
        CHECK(std::abs(dist.density[i] - expect) < 1e-10 * scale);
        cross_max = std::max(cross_max, std::abs(dist.density[i] - dist.envelope[i]));
    }
    CHECK(cross_max > 1e-3 * scale);  // interference genuinely restored

    // mirror symmetry: at the screen center the cross term is purely real
    const Complex e1_mid = slit_amplitude(overlap, 1, 0, 0.0, t2);
    const Complex e2_mid = slit_amplitude(overlap, 1, 1, 0.0, t2);
    const Complex mid_cross =
        (std::conj(t(0, 0)) * t(0, 1) + std::conj(t(1, 0)) * t(1, 1)) * std::conj(e1_mid) * e2_mid;
    CHECK(std::abs(mid_cross.imag()) < 1e-16 * std::abs(mid_cross));

    // removing the markers (no stage-1 passage) sharpens the pattern
    const CompositeState unmarked = init_double_slit(
        cats.layout,
        {make_cat(1.0, CatSign::plus, n, true), make_cat(1.0, CatSign::minus, n, true)}, "b");
    ScreenDistribution free_dist = four_slit_density(unmarked, overlap, xs);
    const Window w{-130.0, 130.0};
    CHECK(visibility(free_dist, w) > visibility(dist, w));
}
