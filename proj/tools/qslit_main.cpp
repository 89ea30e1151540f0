#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qslit/config.hpp"
#include "qslit/report_io.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitSuccess = 0;
constexpr int kExitBadConfig = 1;
constexpr int kExitImpossibleOutcome = 2;
constexpr int kExitOracleResidual = 3;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) qslit::fail(qslit::ErrorCode::io_error, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) qslit::fail(qslit::ErrorCode::io_error, "cannot write " + path.string());
    out << contents;
}

int run_command(const std::string& config_path, const std::string& out_dir, std::uint64_t seed,
                bool oracle, double oracle_threshold, const std::string& format_version) {
    if (format_version != qslit::kFormatVersion) {
        std::cerr << "error: format version " << format_version << " does not match engine version "
                  << qslit::kFormatVersion << "\n";
        return kExitBadConfig;
    }
    qslit::ScenarioConfig config;
    try {
        config = qslit::parse_config(slurp(config_path));
    } catch (const qslit::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadConfig;
    }

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        std::cerr << "error: cannot create output directory " << out_dir << "\n";
        return kExitBadConfig;
    }

    qslit::RunOptions options;
    options.oracle = oracle;
    options.oracle_threshold = oracle_threshold;

    qslit::ScenarioReport report;
    try {
        report = qslit::run_scenario(config, seed, options);
    } catch (const qslit::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == qslit::ErrorCode::impossible_outcome ? kExitImpossibleOutcome
                                                                : kExitBadConfig;
    }

    write_file(fs::path(out_dir) / "report.json",
               qslit::json_to_string_17g(qslit::report_to_json(report)) + "\n");
    for (std::size_t i = 0; i < report.densities.size(); ++i) {
        const auto& [name, dist] = report.densities[i];
        std::ostringstream csv;
        qslit::write_density_csv(dist, csv);
        const std::string file = i == 0 ? "density.csv" : "density_" + name + ".csv";
        write_file(fs::path(out_dir) / file, csv.str());
    }
    {
        std::ostringstream log;
        qslit::write_steps_log(report, log);
        write_file(fs::path(out_dir) / "steps.log", log.str());
    }

    if (report.oracle && report.oracle->max_residual > oracle_threshold) {
        std::cerr << "error: oracle residual " << report.oracle->max_residual
                  << " exceeds threshold " << oracle_threshold << "\n";
        return kExitOracleResidual;
    }
    return kExitSuccess;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qslit: cavity-QED double-slit and quantum-eraser simulation engine"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool oracle = false;
    double oracle_threshold = 1e-10;
    std::string format_version = qslit::kFormatVersion;

    auto* run = app.add_subcommand("run", "execute a scenario and write its outputs");
    run->add_option("--config", config_path, "scenario configuration (JSON)")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--seed", seed, "seed for sampled measurements");
    run->add_flag("--oracle", oracle, "run the dense reference simulator and compare");
    run->add_option("--oracle-threshold", oracle_threshold,
                    "max tolerated engine-vs-reference residual");
    run->add_option("--format-version", format_version, "expected output format version");

    auto* list = app.add_subcommand("list-scenarios", "print the available scenarios");

    auto* validate = app.add_subcommand("validate", "check a configuration without running");
    validate->add_option("--config", config_path, "scenario configuration (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitSuccess : kExitBadConfig;
    }

    try {
        if (run->parsed())
            return run_command(config_path, out_dir, seed, oracle, oracle_threshold,
                               format_version);
        if (list->parsed()) {
            for (char s = 'A'; s <= 'E'; ++s)
                std::cout << s << "  " << qslit::scenario_description(s) << "\n";
            return kExitSuccess;
        }
        if (validate->parsed()) {
            qslit::parse_config(slurp(config_path));
            std::cout << "ok\n";
            return kExitSuccess;
        }
    } catch (const qslit::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == qslit::ErrorCode::impossible_outcome ? kExitImpossibleOutcome
                                                                : kExitBadConfig;
    }
    return kExitBadConfig;
}
