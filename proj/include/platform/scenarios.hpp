#pragma once
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>
#include <nlohmann/json.hpp>
#include <platform/sim_engine.hpp>

namespace platform {

/* Names accepted by run_preset, in catalog order. */
const std::vector<std::string>& preset_names();

struct RunOverrides {
    std::optional<std::int64_t> reps;
    std::optional<std::uint64_t> seed;
    std::optional<SimulationMode> mode;
    /* Step of the shift sweep in flexible-platform presets. */
    std::optional<int> sweep_step;
    unsigned workers = 1;
};

/* One long-format line of results.csv. */
struct ResultRow {
    std::string preset;
    double sweep_value = 0.0;
    std::string design;
    std::string adjustment;
    std::string metric;
    double estimate = 0.0;
    std::optional<double> mc_se;
    std::int64_t reps = 0;
    std::uint64_t seed = 0;
};

struct Report {
    std::string preset;
    /* Name of the swept quantity, used as the plotdata x column. */
    std::string axis;
    std::vector<ResultRow> rows;
    nlohmann::json detail;
};

/* Builds the report in memory; throws invalid_argument for unknown names. */
Report build_preset_report(const std::string& name, const RunOverrides& overrides = {});

/* Runs a single configured scenario. */
Report build_config_report(const ScenarioConfig& config, unsigned workers = 1);

/* Rows sorted by (preset, sweep_value, design, adjustment, metric). */
std::string results_csv(const Report& report);

/* Wide table: one row per sweep value, one column per design:adjustment:metric. */
std::string plotdata_csv(const Report& report);

/* Writes results.csv, results.json and plotdata/<preset>.csv under out_dir. */
void write_report(const Report& report, const std::filesystem::path& out_dir);

Report run_preset(const std::string& name, const RunOverrides& overrides,
                  const std::filesystem::path& out_dir);

/*
 * Scenario from JSON. Accepted keys: m, n, control, shift, design, effects,
 * alpha, sidedness, adjustment, reps, seed, mode, k_list. Unknown keys and
 * invalid values raise config_error naming the field.
 */
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const OperatingCharacteristics& oc);

}  // namespace platform
