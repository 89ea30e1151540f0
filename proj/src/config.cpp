#include "qslit/config.hpp"

#include <set>

namespace qslit {

namespace {

void reject_unknown_keys(const Json& obj, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!known.contains(key))
            fail(ErrorCode::unknown_key, "'" + where + key + "' is not a recognized field");
    }
}

double require_number(const Json& obj, const std::string& key, const std::string& where) {
    const auto& v = obj.at(key);
    if (!v.is_number())
        fail(ErrorCode::invariant_violation, "'" + where + key + "' must be a number");
    return v.get<double>();
}

Complex parse_complex(const Json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        fail(ErrorCode::invariant_violation, "'" + where + "' must be a [re, im] pair");
    return Complex(v[0].get<double>(), v[1].get<double>());
}

void parse_probe(const Json& v, const std::string& where, ProbeSpec& spec) {
    if (!v.is_object()) fail(ErrorCode::invariant_violation, "'" + where + "' must be an object");
    reject_unknown_keys(v, {"gt"}, where + ".");
    if (!v.contains("gt")) fail(ErrorCode::invariant_violation, "'" + where + ".gt' is required");
    if (v["gt"].is_string()) {
        if (v["gt"].get<std::string>() != "auto")
            fail(ErrorCode::invariant_violation, "'" + where + ".gt' must be a number or \"auto\"");
        spec.auto_gt = true;
    } else {
        spec.auto_gt = false;
        spec.gt = require_number(v, "gt", where + ".");
    }
}

std::pair<int, int> line_column(std::string_view text, std::size_t byte) {
    int line = 1, column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

}  // namespace

ScenarioConfig parse_config(std::string_view text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        const auto [line, column] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        fail(ErrorCode::parse_error, "line " + std::to_string(line) + ", column " +
                                         std::to_string(column) + ": " + e.what());
    }
    if (!doc.is_object()) fail(ErrorCode::parse_error, "top level must be a JSON object");

    reject_unknown_keys(doc,
                        {"scenario", "alpha1", "alpha2", "truncation", "tail_tol", "phi", "probes",
                         "geometry", "grid", "window", "measurements", "transfer_mode"},
                        "");

    ScenarioConfig c;
    if (!doc.contains("scenario") || !doc["scenario"].is_string())
        fail(ErrorCode::invariant_violation, "'scenario' is required and must be one of A-E");
    const std::string s = doc["scenario"].get<std::string>();
    if (s.size() != 1 || s[0] < 'A' || s[0] > 'E')
        fail(ErrorCode::invariant_violation, "'scenario' must be one of A-E");
    c.scenario = s[0];

    if (!doc.contains("alpha1") || !doc.contains("alpha2"))
        fail(ErrorCode::invariant_violation, "'alpha1' and 'alpha2' are required");
    c.alpha1 = parse_complex(doc["alpha1"], "alpha1");
    c.alpha2 = parse_complex(doc["alpha2"], "alpha2");

    if (doc.contains("truncation")) {
        if (!doc["truncation"].is_number_integer())
            fail(ErrorCode::invariant_violation, "'truncation' must be an integer");
        c.truncation = doc["truncation"].get<int>();
    }
    if (doc.contains("tail_tol")) c.tail_tol = require_number(doc, "tail_tol", "");
    if (doc.contains("phi")) c.phi = require_number(doc, "phi", "");

    if (doc.contains("probes")) {
        const auto& probes = doc["probes"];
        if (!probes.is_object())
            fail(ErrorCode::invariant_violation, "'probes' must be an object");
        reject_unknown_keys(probes, {"A2", "A3"}, "probes.");
        for (const auto& [id, spec] : probes.items()) parse_probe(spec, "probes." + id, c.probes[id]);
    }

    if (doc.contains("geometry")) {
        const auto& g = doc["geometry"];
        if (!g.is_object()) fail(ErrorCode::invariant_violation, "'geometry' must be an object");
        reject_unknown_keys(g,
                            {"slit_separation", "slit_width", "L1", "L2", "eta_separation",
                             "stage2_width", "mass", "velocity", "hbar"},
                            "geometry.");
        if (g.contains("slit_separation"))
            c.geometry.slit_separation = require_number(g, "slit_separation", "geometry.");
        if (g.contains("slit_width"))
            c.geometry.slit_width = require_number(g, "slit_width", "geometry.");
        if (g.contains("L1")) c.geometry.length1 = require_number(g, "L1", "geometry.");
        if (g.contains("L2")) c.geometry.length2 = require_number(g, "L2", "geometry.");
        if (g.contains("eta_separation"))
            c.geometry.eta_separation = require_number(g, "eta_separation", "geometry.");
        if (g.contains("stage2_width"))
            c.geometry.stage2_width = require_number(g, "stage2_width", "geometry.");
        if (g.contains("mass")) c.geometry.mass = require_number(g, "mass", "geometry.");
        if (g.contains("velocity"))
            c.geometry.velocity = require_number(g, "velocity", "geometry.");
        if (g.contains("hbar")) c.geometry.hbar = require_number(g, "hbar", "geometry.");
    }

    if (doc.contains("grid")) {
        const auto& g = doc["grid"];
        if (!g.is_object()) fail(ErrorCode::invariant_violation, "'grid' must be an object");
        reject_unknown_keys(g, {"points", "half_width"}, "grid.");
        if (g.contains("points")) {
            if (!g["points"].is_number_integer())
                fail(ErrorCode::invariant_violation, "'grid.points' must be an integer");
            c.grid.points = g["points"].get<int>();
        }
        if (g.contains("half_width")) c.grid.half_width = require_number(g, "half_width", "grid.");
    }

    if (doc.contains("window")) {
        const auto& w = doc["window"];
        if (!w.is_object()) fail(ErrorCode::invariant_violation, "'window' must be an object");
        reject_unknown_keys(w, {"half_width"}, "window.");
        if (w.contains("half_width"))
            c.window_half_width = require_number(w, "half_width", "window.");
    }

    if (doc.contains("measurements")) {
        const auto& plan = doc["measurements"];
        if (!plan.is_array())
            fail(ErrorCode::invariant_violation, "'measurements' must be an array");
        for (const auto& entry : plan) {
            if (!entry.is_object())
                fail(ErrorCode::invariant_violation, "each measurement must be an object");
            reject_unknown_keys(entry, {"atom", "mode", "outcome", "seed"}, "measurements[].");
            MeasurePlanStep step;
            if (!entry.contains("atom") || !entry["atom"].is_string())
                fail(ErrorCode::invariant_violation, "'measurements[].atom' is required");
            step.atom = entry["atom"].get<std::string>();
            const std::string mode =
                entry.contains("mode") ? entry["mode"].get<std::string>() : "postselect";
            if (mode == "postselect") {
                step.mode = MeasureMode::postselect;
                if (!entry.contains("outcome") || !entry["outcome"].is_string())
                    fail(ErrorCode::invariant_violation,
                         "'measurements[].outcome' is required for postselect");
                step.outcome = entry["outcome"].get<std::string>();
            } else if (mode == "sample") {
                step.mode = MeasureMode::sample;
                if (entry.contains("seed")) step.seed = entry["seed"].get<std::uint64_t>();
            } else {
                fail(ErrorCode::invariant_violation,
                     "'measurements[].mode' must be postselect or sample");
            }
            c.measurements.push_back(std::move(step));
        }
    }

    if (doc.contains("transfer_mode")) {
        const std::string mode = doc["transfer_mode"].get<std::string>();
        if (mode == "point")
            c.transfer_mode = TransferMode::point_sample;
        else if (mode == "aperture")
            c.transfer_mode = TransferMode::aperture_overlap;
        else
            fail(ErrorCode::invariant_violation, "'transfer_mode' must be point or aperture");
    }

    validate_config(c);
    return c;
}

void validate_config(const ScenarioConfig& c) {
    if (c.scenario < 'A' || c.scenario > 'E')
        fail(ErrorCode::invariant_violation, "'scenario' must be one of A-E");
    if (!is_finite(c.alpha1) || !is_finite(c.alpha2))
        fail(ErrorCode::invariant_violation, "'alpha1'/'alpha2' must be finite");
    if (!(c.tail_tol > 0.0) || !(c.tail_tol < 1.0))
        fail(ErrorCode::invariant_violation, "'tail_tol' must lie in (0, 1)");
    if (!std::isfinite(c.phi)) fail(ErrorCode::invariant_violation, "'phi' must be finite");
    if (c.truncation < 0)
        fail(ErrorCode::invariant_violation, "'truncation' must be a positive integer");

    if (!(c.geometry.slit_width > 0.0))
        fail(ErrorCode::invariant_violation, "'geometry.slit_width' must be > 0");
    if (!(c.geometry.length1 > 0.0))
        fail(ErrorCode::invariant_violation, "'geometry.L1' must be > 0");
    if (!(c.geometry.slit_separation > 0.0))
        fail(ErrorCode::invariant_violation, "'geometry.slit_separation' must be > 0");
    if (!(c.geometry.mass > 0.0)) fail(ErrorCode::invariant_violation, "'geometry.mass' must be > 0");
    if (!(c.geometry.velocity > 0.0))
        fail(ErrorCode::invariant_violation, "'geometry.velocity' must be > 0");
    if (!(c.geometry.hbar > 0.0)) fail(ErrorCode::invariant_violation, "'geometry.hbar' must be > 0");
    if (c.scenario == 'E') {
        if (!(c.geometry.length2 > 0.0))
            fail(ErrorCode::invariant_violation, "'geometry.L2' must be > 0");
        if (c.geometry.eta_separation < 0.0)
            fail(ErrorCode::invariant_violation, "'geometry.eta_separation' must be >= 0");
    } else {
        if (c.geometry.eta_separation != 0.0 || c.geometry.stage2_width != 0.0)
            fail(ErrorCode::invariant_violation,
                 "'geometry.eta_separation'/'stage2_width' apply to scenario E only");
    }

    if (c.grid.points < 16)
        fail(ErrorCode::invariant_violation, "'grid.points' must be at least 16");
    if (c.grid.half_width < 0.0)
        fail(ErrorCode::invariant_violation, "'grid.half_width' must be >= 0");
    if (c.window_half_width < 0.0)
        fail(ErrorCode::invariant_violation, "'window.half_width' must be >= 0");

    const bool needs_a2 = c.scenario == 'B' || c.scenario == 'C';
    const bool needs_a3 = c.scenario == 'C';
    if (needs_a2 && !c.probes.contains("A2"))
        fail(ErrorCode::invariant_violation,
             "'probes.A2' is required for scenario " + std::string(1, c.scenario));
    if (needs_a3 && !c.probes.contains("A3"))
        fail(ErrorCode::invariant_violation, "'probes.A3' is required for scenario C");
    if (!needs_a2 && c.probes.contains("A2"))
        fail(ErrorCode::invariant_violation, "'probes.A2' applies to scenarios B and C only");
    if (!needs_a3 && c.probes.contains("A3"))
        fail(ErrorCode::invariant_violation, "'probes.A3' applies to scenario C only");

    if ((c.scenario == 'D' || c.scenario == 'E') && c.alpha2 == Complex(0.0, 0.0))
        fail(ErrorCode::invariant_violation,
             "'alpha2' must be nonzero: the odd cat at alpha = 0 is the zero vector");

    if ((c.scenario == 'A' || c.scenario == 'E') && !c.measurements.empty())
        fail(ErrorCode::invariant_violation,
             "'measurements' apply to scenarios B, C and D only");
    for (const auto& m : c.measurements) {
        const bool known = m.atom == "A1" || (m.atom == "A2" && needs_a2) ||
                           (m.atom == "A3" && needs_a3);
        if (!known)
            fail(ErrorCode::invariant_violation,
                 "'measurements[].atom' " + m.atom + " does not exist in scenario " +
                     std::string(1, c.scenario));
        if (m.mode == MeasureMode::postselect) {
            const AtomKind kind = m.atom == "A1" ? AtomKind::lambda : AtomKind::two_level;
            const auto labels = atom_level_labels(kind);
            if (std::find(labels.begin(), labels.end(), m.outcome) == labels.end())
                fail(ErrorCode::invariant_violation,
                     "'measurements[].outcome' " + m.outcome + " is not a level of " + m.atom);
        }
    }

    // the cutoff must hold the largest amplitude the run can produce
    const double amp = std::max(std::abs(c.alpha1), std::abs(c.alpha2));
    const double envelope = (c.scenario == 'B' || c.scenario == 'C') ? 2.0 * amp : amp;
    const int n = c.resolved_truncation();
    const double tail = coherent_tail_mass(envelope, n);
    if (tail >= c.tail_tol)
        fail(ErrorCode::invariant_violation,
             "'truncation' " + std::to_string(n) + " leaves tail mass " + std::to_string(tail) +
                 " for envelope amplitude " + std::to_string(envelope));
}

Json config_to_json(const ScenarioConfig& c) {
    Json doc;
    doc["scenario"] = std::string(1, c.scenario);
    doc["alpha1"] = Json::array({c.alpha1.real(), c.alpha1.imag()});
    doc["alpha2"] = Json::array({c.alpha2.real(), c.alpha2.imag()});
    doc["truncation"] = c.resolved_truncation();
    doc["tail_tol"] = c.tail_tol;
    doc["phi"] = c.phi;

    if (c.scenario == 'B' || c.scenario == 'C') {
        Json probes = Json::object();
        probes["A2"] = Json{{"gt", c.resolved_gt("A2")}};
        if (c.scenario == 'C') probes["A3"] = Json{{"gt", c.resolved_gt("A3")}};
        doc["probes"] = probes;
    }

    Json geometry;
    geometry["slit_separation"] = c.geometry.slit_separation;
    geometry["slit_width"] = c.geometry.slit_width;
    geometry["L1"] = c.geometry.length1;
    geometry["mass"] = c.geometry.mass;
    geometry["velocity"] = c.geometry.velocity;
    geometry["hbar"] = c.geometry.hbar;
    if (c.scenario == 'E') {
        geometry["L2"] = c.geometry.length2;
        geometry["eta_separation"] = c.geometry.eta_separation > 0.0 ? c.geometry.eta_separation
                                                                     : c.geometry.slit_separation;
        geometry["stage2_width"] =
            c.geometry.stage2_width > 0.0 ? c.geometry.stage2_width : c.geometry.slit_width;
    }
    doc["geometry"] = geometry;

    doc["grid"] = Json{{"points", c.grid.points}, {"half_width", c.resolved_grid_half_width()}};
    doc["window"] = Json{{"half_width", c.resolved_window_half_width()}};

    Json plan = Json::array();
    for (const auto& m : c.resolved_plan()) {
        Json entry;
        entry["atom"] = m.atom;
        entry["mode"] = m.mode == MeasureMode::postselect ? "postselect" : "sample";
        if (m.mode == MeasureMode::postselect) entry["outcome"] = m.outcome;
        if (m.seed) entry["seed"] = *m.seed;
        plan.push_back(entry);
    }
    doc["measurements"] = plan;

    if (c.scenario == 'E')
        doc["transfer_mode"] =
            c.transfer_mode == TransferMode::point_sample ? "point" : "aperture";
    return doc;
}

}  // namespace qslit
