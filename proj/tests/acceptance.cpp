// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line with the measured quantities. Run the whole binary for the full table
// or filter with --test-case="criterion NN*".
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qslit/config.hpp"
#include "qslit/oracle.hpp"
#include "qslit/report_io.hpp"

using namespace qslit;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    int number;
    struct Item {
        std::string what;
        bool ok;
    };
    std::vector<Item> items;

    explicit Criterion(int n) : number(n) {}

    void add(bool ok, const std::string& what) { items.push_back({what, ok}); }

    void print() const {
        bool all = true;
        for (const auto& item : items) all = all && item.ok;
        std::printf("[criterion %02d] %s\n", number, all ? "PASS" : "FAIL");
        for (const auto& item : items)
            std::printf("    %s  %s\n", item.ok ? "ok  " : "FAIL", item.what.c_str());
        std::fflush(stdout);
    }
};

#define REPORT_CRITERION(crit)                      \
    do {                                            \
        (crit).print();                             \
        for (const auto& item : (crit).items) {     \
            INFO(item.what);                        \
            CHECK(item.ok);                         \
        }                                           \
    } while (0)

std::string fmt(const char* pattern, double value) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), pattern, value);
    return buf;
}

ScenarioConfig scenario_config(char scenario, double alpha, int truncation = 0,
                               double tail_tol = 1e-12) {
    ScenarioConfig c;
    c.scenario = scenario;
    c.alpha1 = alpha;
    c.alpha2 = alpha;
    c.truncation = truncation;
    c.tail_tol = tail_tol;
    if (scenario == 'B' || scenario == 'C') c.probes["A2"] = ProbeSpec{true, 0.0};
    if (scenario == 'C') c.probes["A3"] = ProbeSpec{true, 0.0};
    validate_config(c);
    return c;
}

double max_abs(const Vector& v) { return v.cwiseAbs().maxCoeff(); }

// largest pointwise relative deviation of a distribution from |psi_path|^2
double conditional_rel_err(const ScreenDistribution& dist, const SlitGeometry& geom, int path) {
    const double t1 = geom.elapsed(0);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < dist.xs.size(); ++i) {
        const double target = std::norm(slit_amplitude(geom, 0, path, dist.xs[i], t1));
        if (target < 1e-280) continue;
        worst = std::max(worst, std::abs(dist.density[i] - target) / target);
    }
    return worst;
}

}  // namespace

TEST_CASE("criterion 01: parity component operator algebra at N = 64") {
    const auto start = std::chrono::steady_clock::now();
    Criterion crit(1);

    double pp = 0.0, mm = 0.0, cross = 0.0, diff = 0.0, sum = 0.0;
    for (const double a : {0.5, 1.0, 2.0, 3.0}) {
        const FieldState f = make_coherent(a, 64);
        const FieldState plus = parity_project(f, CatSign::plus);
        const FieldState minus = parity_project(f, CatSign::minus);
        pp = std::max(pp, max_abs(parity_project(plus, CatSign::plus).amps - plus.amps));
        mm = std::max(mm, max_abs(parity_project(minus, CatSign::minus).amps - minus.amps));
        cross = std::max(cross, max_abs(parity_project(minus, CatSign::plus).amps));
        cross = std::max(cross, max_abs(parity_project(plus, CatSign::minus).amps));
        diff = std::max(diff, max_abs(plus.amps - minus.amps - f.amps));
        sum = std::max(sum, max_abs(plus.amps + minus.amps - apply_number_phase(f, pi).amps));
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    crit.add(pp <= 1e-14, fmt("Pi+^2 = Pi+ componentwise (max dev %.3e)", pp));
    // The minus component of (e^{i pi n} - 1)/2 scales odd amplitudes by -1,
    // so its square is its negative: Pi-^2 = -Pi-. Idempotence cannot hold
    // together with Pi+ - Pi- = 1 and Pi+ + Pi- = parity, and the engine keeps
    // the operator definition those two identities (and the marked-state
    // signs) require. This check records the deviation honestly.
    crit.add(mm <= 1e-14, fmt("Pi-^2 = Pi- componentwise (max dev %.3e)", mm));
    crit.add(cross <= 1e-14, fmt("Pi+ Pi- = 0 (max dev %.3e)", cross));
    crit.add(diff <= 1e-14, fmt("Pi+ - Pi- = identity (max dev %.3e)", diff));
    crit.add(sum <= 1e-14, fmt("Pi+ + Pi- = parity (max dev %.3e)", sum));
    crit.add(elapsed < 1.0, fmt("runtime %.3f s < 1 s", elapsed));
    REPORT_CRITERION(crit);
}

TEST_CASE("criterion 02: four-branch marked state with signs at N = 32") {
    Criterion crit(2);
    const int n = 32;
    const ScenarioConfig config = scenario_config('A', 1.0, n);
    const ScenarioScript script = build_script(config, 0);
    const BranchTrace trace = run_script(script);
    const CompositeState& state = trace.states.back();

    CompositeState target;
    target.layout = script.layout;
    const double c0 = 1.0 / (2.0 * std::sqrt(2.0));
    const FieldState coh = make_coherent(1.0, n);
    const FieldState plus = make_cat(1.0, CatSign::plus, n);
    const FieldState minus = make_cat(1.0, CatSign::minus, n);
    Vector b_level = Vector::Zero(3), c_level = Vector::Zero(3);
    b_level[lambda_level_b] = 1.0;
    c_level[lambda_level_c] = 1.0;
    target.branches.push_back(Branch{c0, 0, {b_level}, {plus, coh}});
    target.branches.push_back(Branch{-c0, 0, {c_level}, {minus, coh}});
    target.branches.push_back(Branch{c0, 1, {b_level}, {coh, plus}});
    target.branches.push_back(Branch{-c0, 1, {c_level}, {coh, minus}});

    const double fidelity = composite_fidelity(state, target);
    crit.add(state.branches.size() == 4,
             fmt("branch count %.0f equals 4", double(state.branches.size())));
    crit.add(fidelity > 1.0 - 1e-10, fmt("overlap with the signed target: 1 - %.3e", 1.0 - fidelity));
    REPORT_CRITERION(crit);
}

TEST_CASE("criterion 03: dense-reference equivalence for all five scenarios at N = 16") {
    const auto start = std::chrono::steady_clock::now();
    Criterion crit(3);
    for (const char scenario : {'A', 'B', 'C', 'D', 'E'}) {
        const ScenarioConfig config = scenario_config(scenario, 1.0, 16, 1e-5);
        const ScenarioScript script = build_script(config, 0);
        const BranchTrace branch = run_script(script);
        std::vector<std::string> outcomes;
        for (const auto& r : branch.records) outcomes.push_back(r.outcome);
        const ResidualReport residuals = compare(dense_run(script, outcomes), branch);
        crit.add(residuals.max_residual < 1e-10,
                 std::string("scenario ") + scenario +
                     fmt(": per-step residual %.3e < 1e-10", residuals.max_residual));
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    crit.add(elapsed < 60.0, fmt("runtime %.2f s < 60 s", elapsed));
    REPORT_CRITERION(crit);
}

TEST_CASE("criterion 04: fringe persistence at alpha = sqrt(10)") {
    Criterion crit(4);
    const ScenarioConfig config = scenario_config('A', std::sqrt(10.0));
    const ScenarioReport report = run_scenario_A(config, 0);

    const double vis = report.derived["visibility"].get<double>();
    // The degree of coherence between the marked paths is
    // (1 + e^{-2(|a1|^2+|a2|^2)})/2, which caps the fringe contrast at 1/2 for
    // these amplitudes; the 0.9 threshold exceeds that physical bound, and the
    // check records the shortfall honestly (the dense reference concurs).
    crit.add(vis > 0.9, fmt("visibility %.6f > 0.9 (physical bound 0.5)", vis));

    const Complex factor(report.derived["cross_factor_first_principles_re"].get<double>(),
                         report.derived["cross_factor_first_principles_im"].get<double>());
    const double deviation = std::abs(factor - Complex(2.0, 0.0));
    crit.add(deviation <= 1e-8, fmt("cross-term env factor within %.3e of 2", deviation));
    crit.add(vis > 0.0, fmt("fringes persist: visibility %.6f > 0", vis));
    REPORT_CRITERION(crit);
}

TEST_CASE("criterion 05: small-alpha cross term, first principles vs printed expression") {
    Criterion crit(5);

    // branch engine at alpha = 1
    const ScenarioConfig config = scenario_config('A', 1.0);
    const ScenarioReport report = run_scenario_A(config, 0);
    const double closed_form = 2.0 * (1.0 + std::exp(-4.0));
    const Complex branch_factor(report.derived["cross_factor_first_principles_re"].get<double>(),
                                report.derived["cross_factor_first_principles_im"].get<double>());
    crit.add(std::abs(branch_factor - Complex(closed_form, 0.0)) <= 1e-10,
             fmt("branch-engine factor dev %.3e from 2(1+e^-4)",
                 std::abs(branch_factor - Complex(closed_form, 0.0))));

    // dense oracle at N = 16
    const ScenarioConfig small = scenario_config('A', 1.0, 16);
    const ScenarioScript script = build_script(small, 0);
    const DenseTrace dense = dense_run(script);
    const DenseState& final_state = dense.states.back();
    const Eigen::Index half = final_state.amps.size() / 2;
    Complex p01(0.0, 0.0), p00(0.0, 0.0);
    for (Eigen::Index e = 0; e < half; ++e) {
        p01 += final_state.amps[e] * std::conj(final_state.amps[half + e]);
        p00 += final_state.amps[e] * std::conj(final_state.amps[e]);
    }
    const Complex dense_factor = 4.0 * p01 / p00;
    crit.add(std::abs(dense_factor - Complex(closed_form, 0.0)) <= 1e-10,
             fmt("dense-oracle factor dev %.3e from 2(1+e^-4)",
                 std::abs(dense_factor - Complex(closed_form, 0.0))));

    crit.add(report.derived["cross_factor_discrepancy_flagged"].get<bool>(),
             "report flags the divergence from the printed (2 - e^-4a1^2 - e^-4a2^2)");

    // both expressions collapse to 2 in the large-amplitude limit
    const double a2 = 10.0;
    const double first_principles = 2.0 * (1.0 + std::exp(-2.0 * (a2 + a2)));
    const double printed = 2.0 - 2.0 * std::exp(-4.0 * a2);
    crit.add(std::abs(first_principles - printed) <= 1e-8,
             fmt("asymptotes at |alpha|^2 = 10 agree to %.3e", std::abs(first_principles - printed)));
    REPORT_CRITERION(crit);
}

TEST_CASE("criterion 06: which-path probes force the conditional densities") {
    Criterion crit(6);

    // scenario C table
    const ScenarioConfig config = scenario_config('C', 1.0);
    const ScenarioScript script = build_script(config, 0);
    const BranchTrace trace = run_script(script);
    const CompositeState& probed = trace.states[6];  // after both injections and probes
    const SlitGeometry geom = config.resolved_geometry();
    const RealVector xs = linspaced_grid(config.grid.points, config.resolved_grid_half_width());

    const auto [rec_e2, after_e2] = measure_atom(probed, "A2", MeasureMode::postselect, "e");
    const auto p3 = outcome_probabilities(after_e2, "A3");
    crit.add(rec_e2.probability * p3.at("e") < 1e-12,
             fmt("P(e2 and e3) = %.3e < 1e-12", rec_e2.probability * p3.at("e")));
    crit.add(std::abs(p3.at("f") - 1.0) <= 1e-12,
             fmt("P(f3 | e2) deviates from 1 by %.3e", std::abs(p3.at("f") - 1.0)));

    const double err_e2 = conditional_rel_err(screen_density(after_e2, geom, xs), geom, 0);
    crit.add(err_e2 < 1e-9, fmt("density after e2 matches |psi_zeta1|^2 (rel %.3e)", err_e2));

    const auto [rec_e3, after_e3] = measure_atom(probed, "A3", MeasureMode::postselect, "e");
    (void)rec_e3;
    const double err_e3 = conditional_rel_err(screen_density(after_e3, geom, xs), geom, 1);
    crit.add(err_e3 < 1e-9, fmt("density after e3 matches |psi_zeta2|^2 (rel %.3e)", err_e3));

    // scenario B single-probe variant
    const ScenarioReport b_report = run_scenario_B(scenario_config('B', 1.0), 0);
    const double b_err = b_report.derived["conditional_density_rel_err"].get<double>();
    crit.add(b_err < 1e-9, fmt("single-probe erasure density matches (rel %.3e)", b_err));
    REPORT_CRITERION(crit);
}

TEST_CASE("criterion 07: cat markers wash out the fringes and reveal the path") {
    Criterion crit(7);
    const ScenarioConfig config = scenario_config('D', 1.0);
    const ScenarioReport report = run_scenario_D(config, 0);

    const double vis = report.derived["visibility_unconditional"].get<double>();
    crit.add(vis < 1e-12, fmt("unconditional visibility %.3e < 1e-12", vis));
    const double b_err = report.derived["given_b1_rel_err"].get<double>();
    crit.add(b_err < 1e-9, fmt("density given b1 matches |psi_zeta1|^2 (rel %.3e)", b_err));
    const double pb = report.derived["p_b1"].get<double>();
    const double pc = report.derived["p_c1"].get<double>();
    crit.add(std::abs(pb - 0.5) <= 1e-12, fmt("P(b1) deviates from 1/2 by %.3e", std::abs(pb - 0.5)));
    crit.add(std::abs(pc - 0.5) <= 1e-12, fmt("P(c1) deviates from 1/2 by %.3e", std::abs(pc - 0.5)));
    REPORT_CRITERION(crit);
}

TEST_CASE("criterion 08: four-slit cascade, sharp versus overlapping") {
    Criterion crit(8);

    ScenarioConfig sharp = scenario_config('E', 1.0);
    sharp.geometry.slit_separation = 14.0;
    sharp.geometry.length1 = 0.02;
    const ScenarioReport sharp_report = run_scenario_E(sharp, 0);
    const double ratio = sharp_report.derived["cross_to_direct_ratio"].get<double>();
    crit.add(ratio < 1e-10, fmt("sharp-peak cross/direct = %.3e < 1e-10", ratio));

    // overlapping regime: engine output vs the direct cascade formula
    const ScenarioConfig overlap = scenario_config('E', 1.0);
    const ScenarioScript script = build_script(overlap, 0);
    const BranchTrace trace = run_script(script);
    const SlitGeometry geom = overlap.resolved_geometry();
    const RealVector xs = linspaced_grid(2048, overlap.resolved_grid_half_width());
    const ScreenDistribution dist = four_slit_density(trace.states.back(), geom, xs);

    Matrix t(2, 2);
    for (int p = 0; p < 2; ++p)
        for (int j = 0; j < 2; ++j) t(p, j) = four_slit_transfer(geom, p, j);
    const double t2 = geom.elapsed(1);
    double scale = 0.0;
    for (Eigen::Index i = 0; i < xs.size(); ++i) scale = std::max(scale, dist.density[i]);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < xs.size(); ++i) {
        const Complex e1 = slit_amplitude(geom, 1, 0, xs[i], t2);
        const Complex e2 = slit_amplitude(geom, 1, 1, xs[i], t2);
        double direct = 0.0;
        for (int p = 0; p < 2; ++p)
            direct +=
                0.5 * (std::norm(t(p, 0)) * std::norm(e1) + std::norm(t(p, 1)) * std::norm(e2));
        const Complex pair =
            (std::conj(t(0, 0)) * t(0, 1) + std::conj(t(1, 0)) * t(1, 1)) * std::conj(e1) * e2;
        worst = std::max(worst, std::abs(dist.density[i] - (direct + std::real(pair))) / scale);
    }
    crit.add(worst <= 1e-10,
             fmt("overlapping density matches the cascade formula (max rel %.3e)", worst));
    REPORT_CRITERION(crit);
}

TEST_CASE("criterion 09: probe dynamics against the analytic excitation curve") {
    Criterion crit(9);
    const int n = 60;
    double worst = 0.0;
    Vector probe_f = Vector::Zero(2);
    probe_f[probe_level_f] = 1.0;
    for (const Complex beta : {Complex(0.4, 0.0), Complex(-2.0, 0.0), Complex(0.0, 1.5),
                               Complex(1.1, -0.9), Complex(-0.7, 0.7)}) {
        const FieldState field = make_coherent(beta, n);
        for (int k = 1; k <= 20; ++k) {
            const double gt = 0.15 * k;
            const AtomFieldJoint evolved = jc_evolve(joint_product(probe_f, field), gt);
            const double via_evolution = evolved.row(probe_level_e).squaredNorm();
            double analytic = 0.0;
            for (int m = 0; m < n; ++m) {
                const double s = std::sin(gt * std::sqrt(double(m + 1)));
                analytic += std::norm(field.amps[m + 1]) * s * s;
            }
            worst = std::max(worst, std::abs(via_evolution - analytic));
            worst = std::max(worst, std::abs(jc_excitation_probability(field, gt) - analytic));
        }
    }
    crit.add(worst <= 1e-12, fmt("max |P(e) - analytic| = %.3e over 5 fields x 20 gt", worst));

    bool invariant = true;
    const AtomFieldJoint ground = joint_product(probe_f, vacuum_state(n));
    for (const double gt : {0.15, 0.8, 3.0, 12.0})
        invariant = invariant && (jc_evolve(ground, gt) - ground).norm() == 0.0;
    crit.add(invariant, "|f> x |0> strictly invariant");
    REPORT_CRITERION(crit);
}

TEST_CASE("criterion 10: propagated norm and far-field fringe spacing") {
    Criterion crit(10);
    SlitGeometry g;
    g.stages.push_back({{-50.0, 50.0}, 1.0, 100.0});

    double worst = 0.0;
    for (const double t : {1.0, 40.0, 100.0, 300.0}) {
        const double spread = std::sqrt(1.0 + t * t / 4.0);
        const RealVector xs = linspaced_grid(40001, 50.0 + 12.0 * spread);
        RealVector dens(xs.size());
        for (Eigen::Index i = 0; i < xs.size(); ++i)
            dens[i] = std::norm(slit_amplitude(g, 0, 0, xs[i], t));
        worst = std::max(worst, std::abs(trapezoid(xs, dens) - 1.0));
    }
    crit.add(worst < 1e-9, fmt("quadrature norm deviates from 1 by %.3e", worst));

    SystemLayout layout;
    layout.path_labels = {"zeta1", "zeta2"};
    layout.atoms.push_back({"A1", AtomKind::lambda});
    layout.cavities.push_back({"C1", 16});
    layout.cavities.push_back({"C2", 16});
    layout.path_cavity = {{"zeta1", "C1"}, {"zeta2", "C2"}};
    const CompositeState two_path =
        init_double_slit(layout, {make_coherent(1.0, 16), make_coherent(1.0, 16)}, "b");
    const RealVector xs = linspaced_grid(40001, 40.0);
    const ScreenDistribution dist = screen_density(two_path, g, xs);
    std::vector<double> maxima;
    for (Eigen::Index i = 1; i + 1 < xs.size(); ++i) {
        if (dist.density[i] > dist.density[i - 1] && dist.density[i] > dist.density[i + 1]) {
            const double y0 = dist.density[i - 1], y1 = dist.density[i], y2 = dist.density[i + 1];
            const double dx = xs[1] - xs[0];
            maxima.push_back(xs[i] + 0.5 * dx * (y0 - y2) / (y0 - 2.0 * y1 + y2));
        }
    }
    double spacing = 0.0;
    for (std::size_t k = 0; k + 1 < maxima.size(); ++k) spacing += maxima[k + 1] - maxima[k];
    spacing /= static_cast<double>(maxima.size() - 1);
    const double expected = g.de_broglie_wavelength() * 100.0 / 100.0;  // lambda L / d
    const double rel = std::abs(spacing - expected) / expected;
    crit.add(rel < 0.02, fmt("fringe spacing off lambda L/d by %.4f%%", 100.0 * rel));
    REPORT_CRITERION(crit);
}

TEST_CASE("criterion 11: byte-identical outputs for identical config and seed") {
    Criterion crit(11);
    const fs::path dir = fs::temp_directory_path() / "qslit_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::ofstream config(dir / "config.json");
        config << R"({"scenario":"D","alpha1":[1,0],"alpha2":[1,0],)"
               << R"("measurements":[{"atom":"A1","mode":"sample"}]})";
    }
    for (const std::string tag : {"first", "second"}) {
        const std::string cmd = std::string(QSLIT_CLI_PATH) + " run --config " +
                                (dir / "config.json").string() + " --out " +
                                (dir / tag).string() + " --seed 2718 > " +
                                (dir / (tag + ".log")).string() + " 2>&1";
        const int status = std::system(cmd.c_str());
        crit.add(WEXITSTATUS(status) == 0, "run (" + tag + ") exits 0");
    }
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    const std::string first = slurp(dir / "first" / "report.json");
    const std::string second = slurp(dir / "second" / "report.json");
    crit.add(!first.empty() && first == second, "report.json byte-identical across reruns");
    crit.add(slurp(dir / "first" / "density.csv") == slurp(dir / "second" / "density.csv"),
             "density.csv byte-identical across reruns");
    fs::remove_all(dir);
    REPORT_CRITERION(crit);
}
