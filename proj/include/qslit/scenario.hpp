#pragma once

#include <optional>

#include <json.hpp>

#include "qslit/oracle.hpp"
#include "qslit/wave_optics.hpp"

namespace qslit {

using Json = nlohmann::json;

inline constexpr const char* kFormatVersion = "1";

struct GridSpec {
    int points = 2048;
    double half_width = 0.0;  // 0 = derived from the geometry's envelope spread
};

struct ProbeSpec {
    bool auto_gt = true;
    double gt = 0.0;
};

struct MeasurePlanStep {
    std::string atom;
    MeasureMode mode = MeasureMode::postselect;
    std::string outcome;  // postselect only
    std::optional<std::uint64_t> seed;
};

struct GeometrySpec {
    double slit_separation = 10.0;
    double slit_width = 1.0;
    double length1 = 100.0;
    double length2 = 100.0;       // scenario E
    double eta_separation = 0.0;  // scenario E; 0 = slit_separation
    double stage2_width = 0.0;    // scenario E; 0 = slit_width
    double mass = 1.0;
    double velocity = 1.0;
    double hbar = 1.0;
};

struct ScenarioConfig {
    char scenario = 'A';
    Complex alpha1{1.0, 0.0};
    Complex alpha2{1.0, 0.0};
    int truncation = 0;  // 0 = default formula
    double tail_tol = 1e-12;
    double phi = pi;
    std::map<std::string, ProbeSpec> probes;  // "A2", "A3"
    GeometrySpec geometry;
    GridSpec grid;
    double window_half_width = 0.0;  // 0 = half the grid half-width
    std::vector<MeasurePlanStep> measurements;  // empty = scenario default plan
    TransferMode transfer_mode = TransferMode::point_sample;

    int resolved_truncation() const;
    double resolved_gt(const std::string& probe_id) const;
    SlitGeometry resolved_geometry() const;
    double resolved_grid_half_width() const;
    double resolved_window_half_width() const;
    std::vector<MeasurePlanStep> resolved_plan() const;
};

struct RunOptions {
    bool oracle = false;
    double oracle_threshold = 1e-10;
};

struct StepLog {
    std::string label;
    double norm2;
    int branch_count;
};

struct ScenarioReport {
    char scenario = 'A';
    std::uint64_t seed = 0;
    Json config_echo;
    std::vector<StepLog> steps;
    std::vector<MeasurementRecord> measurements;
    Json derived;
    // densities.front() is the headline distribution written to density.csv
    std::vector<std::pair<std::string, ScreenDistribution>> densities;
    std::optional<ResidualReport> oracle;
};

std::string scenario_description(char scenario);

ScenarioScript build_script(const ScenarioConfig& config, std::uint64_t seed);

ScenarioReport run_scenario(const ScenarioConfig& config, std::uint64_t seed = 0,
                            const RunOptions& options = {});

ScenarioReport run_scenario_A(const ScenarioConfig& config, std::uint64_t seed = 0,
                              const RunOptions& options = {});
ScenarioReport run_scenario_B(const ScenarioConfig& config, std::uint64_t seed = 0,
                              const RunOptions& options = {});
ScenarioReport run_scenario_C(const ScenarioConfig& config, std::uint64_t seed = 0,
                              const RunOptions& options = {});
ScenarioReport run_scenario_D(const ScenarioConfig& config, std::uint64_t seed = 0,
                              const RunOptions& options = {});
ScenarioReport run_scenario_E(const ScenarioConfig& config, std::uint64_t seed = 0,
                              const RunOptions& options = {});

}  // namespace qslit
