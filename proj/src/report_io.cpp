#include "qslit/report_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace qslit {

namespace {

void write_escaped(const std::string& s, std::ostream& out) {
    out << '"';
    for (const char ch : s) {
        switch (ch) {
            case '"': out << "\\\""; break;
            case '\\': out << "\\\\"; break;
            case '\b': out << "\\b"; break;
            case '\f': out << "\\f"; break;
            case '\n': out << "\\n"; break;
            case '\r': out << "\\r"; break;
            case '\t': out << "\\t"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
                    out << buf;
                } else {
                    out << ch;
                }
        }
    }
    out << '"';
}

void write_double_17g(double v, std::ostream& out) {
    if (!std::isfinite(v)) fail(ErrorCode::invariant_violation, "non-finite number in output");
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
}

std::string shortest_double(double v) {
    if (!std::isfinite(v)) fail(ErrorCode::invariant_violation, "non-finite number in output");
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

const char* json_type_name(const Json& v) {
    if (v.is_null()) return "null";
    if (v.is_boolean()) return "boolean";
    if (v.is_string()) return "string";
    if (v.is_array()) return "array";
    if (v.is_object()) return "object";
    if (v.is_number_integer() || v.is_number_unsigned()) return "integer";
    return "number";
}

void validate_node(const Json& schema, const Json& doc, const std::string& path,
                   std::vector<std::string>& errors) {
    if (schema.contains("type")) {
        const std::string want = schema["type"].get<std::string>();
        const std::string got = json_type_name(doc);
        const bool ok = want == got || (want == "number" && got == "integer");
        if (!ok) {
            errors.push_back(path + ": expected " + want + ", got " + got);
            return;
        }
    }
    if (schema.contains("enum")) {
        bool found = false;
        for (const auto& v : schema["enum"])
            if (v == doc) found = true;
        if (!found) errors.push_back(path + ": value not in enum");
    }
    if (doc.is_number() && schema.contains("minimum") &&
        doc.get<double>() < schema["minimum"].get<double>())
        errors.push_back(path + ": below minimum");
    if (doc.is_number() && schema.contains("maximum") &&
        doc.get<double>() > schema["maximum"].get<double>())
        errors.push_back(path + ": above maximum");
    if (doc.is_object()) {
        if (schema.contains("required"))
            for (const auto& key : schema["required"])
                if (!doc.contains(key.get<std::string>()))
                    errors.push_back(path + ": missing required key '" + key.get<std::string>() +
                                     "'");
        const Json props = schema.value("properties", Json::object());
        for (const auto& [key, sub] : doc.items()) {
            if (props.contains(key)) {
                validate_node(props[key], sub, path + "/" + key, errors);
            } else if (schema.contains("additionalProperties") &&
                       schema["additionalProperties"].is_boolean() &&
                       !schema["additionalProperties"].get<bool>()) {
                errors.push_back(path + ": unexpected key '" + key + "'");
            } else if (schema.contains("additionalProperties") &&
                       schema["additionalProperties"].is_object()) {
                validate_node(schema["additionalProperties"], sub, path + "/" + key, errors);
            }
        }
    }
    if (doc.is_array() && schema.contains("items")) {
        for (std::size_t i = 0; i < doc.size(); ++i)
            validate_node(schema["items"], doc[i], path + "/" + std::to_string(i), errors);
    }
}

}  // namespace

void write_json_17g(const Json& doc, std::ostream& out) {
    switch (doc.type()) {
        case Json::value_t::null: out << "null"; break;
        case Json::value_t::boolean: out << (doc.get<bool>() ? "true" : "false"); break;
        case Json::value_t::number_integer: out << doc.get<std::int64_t>(); break;
        case Json::value_t::number_unsigned: out << doc.get<std::uint64_t>(); break;
        case Json::value_t::number_float: write_double_17g(doc.get<double>(), out); break;
        case Json::value_t::string: write_escaped(doc.get<std::string>(), out); break;
        case Json::value_t::array: {
            out << '[';
            bool first = true;
            for (const auto& v : doc) {
                if (!first) out << ',';
                first = false;
                write_json_17g(v, out);
            }
            out << ']';
            break;
        }
        case Json::value_t::object: {
            // nlohmann objects iterate in key order, which keeps this stable
            out << '{';
            bool first = true;
            for (const auto& [key, v] : doc.items()) {
                if (!first) out << ',';
                first = false;
                write_escaped(key, out);
                out << ':';
                write_json_17g(v, out);
            }
            out << '}';
            break;
        }
        default: fail(ErrorCode::internal_error, "unsupported JSON node");
    }
}

std::string json_to_string_17g(const Json& doc) {
    std::ostringstream out;
    write_json_17g(doc, out);
    return out.str();
}

Json report_to_json(const ScenarioReport& report) {
    Json doc;
    doc["format_version"] = kFormatVersion;
    doc["scenario"] = std::string(1, report.scenario);
    doc["seed"] = report.seed;
    doc["config"] = report.config_echo;

    Json steps = Json::array();
    for (const auto& s : report.steps)
        steps.push_back(Json{{"label", s.label},
                             {"norm2", s.norm2},
                             {"branch_count", s.branch_count}});
    doc["steps"] = steps;

    Json measurements = Json::array();
    for (const auto& r : report.measurements)
        measurements.push_back(
            Json{{"atom", r.atom_id}, {"outcome", r.outcome}, {"probability", r.probability}});
    doc["measurements"] = measurements;

    doc["derived"] = report.derived;

    Json densities = Json::object();
    for (std::size_t i = 0; i < report.densities.size(); ++i) {
        const auto& [name, dist] = report.densities[i];
        Json entry;
        entry["file"] = i == 0 ? "density.csv" : "density_" + name + ".csv";
        entry["points"] = static_cast<int>(dist.xs.size());
        entry["path_count"] = dist.path_count;
        entry["normalized_integral"] = trapezoid(dist.xs, dist.normalized);
        entry["raw_integral"] = trapezoid(dist.xs, dist.density);
        if (std::isfinite(dist.visibility)) entry["visibility"] = dist.visibility;
        densities[name] = entry;
    }
    doc["densities"] = densities;

    if (report.oracle) {
        Json oracle;
        oracle["enabled"] = true;
        oracle["max_residual"] = report.oracle->max_residual;
        Json per_step = Json::array();
        for (const auto& s : report.oracle->per_step)
            per_step.push_back(Json{{"label", s.label}, {"residual", s.residual}});
        oracle["per_step"] = per_step;
        doc["oracle"] = oracle;
    }
    return doc;
}

void write_density_csv(const ScreenDistribution& dist, std::ostream& out) {
    out << "x,raw_density,normalized_density\n";
    for (Eigen::Index i = 0; i < dist.xs.size(); ++i) {
        if (i > 0 && !(dist.xs[i] > dist.xs[i - 1]))
            fail(ErrorCode::invariant_violation, "density grid must be strictly increasing");
        out << shortest_double(dist.xs[i]) << ',' << shortest_double(dist.density[i]) << ','
            << shortest_double(dist.normalized[i]) << '\n';
    }
}

void write_steps_log(const ScenarioReport& report, std::ostream& out) {
    out << "scenario " << report.scenario << " (seed " << report.seed << ")\n";
    for (std::size_t i = 0; i < report.steps.size(); ++i) {
        const auto& s = report.steps[i];
        char norm_buf[64];
        std::snprintf(norm_buf, sizeof(norm_buf), "%.15g", s.norm2);
        out << "step " << i << ": " << s.label << "  norm2=" << norm_buf
            << "  branches=" << s.branch_count << '\n';
    }
    for (const auto& r : report.measurements) {
        char p_buf[64];
        std::snprintf(p_buf, sizeof(p_buf), "%.15g", r.probability);
        out << "measured " << r.atom_id << " -> " << r.outcome << "  (p=" << p_buf << ")\n";
    }
    if (report.oracle) {
        char r_buf[64];
        std::snprintf(r_buf, sizeof(r_buf), "%.3g", report.oracle->max_residual);
        out << "oracle max residual " << r_buf << '\n';
    }
}

std::vector<std::string> schema_validate(const Json& schema, const Json& doc) {
    std::vector<std::string> errors;
    validate_node(schema, doc, "", errors);
    return errors;
}

}  // namespace qslit
