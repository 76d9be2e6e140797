#pragma once
#include <cstdint>
#include <string>
#include <vector>
#include <platform/adjust.hpp>
#include <platform/design.hpp>
#include <platform/metrics.hpp>
#include <platform/rng.hpp>

namespace platform {

enum class SimulationMode { patient_level, sufficient_statistic };

std::string to_string(SimulationMode mode);
SimulationMode simulation_mode_from_string(const std::string& s);

inline constexpr std::uint64_t kDefaultSeed = 20230615;
inline constexpr std::int64_t kDefaultReps = 50000;

/*
 * One Monte Carlo scenario. Control outcomes have mean 0, every outcome has
 * unit variance, and effects[j] is the mean of arm j.
 */
struct ScenarioConfig {
    PlatformDesign design;
    std::vector<double> effects;
    AdjustmentPolicy policy{};
    std::int64_t reps = kDefaultReps;
    std::uint64_t seed = kDefaultSeed;
    SimulationMode mode = SimulationMode::sufficient_statistic;
    std::vector<int> k_list = {1, 2, 3};

    void validate() const;
};

struct ReplicationResult {
    std::vector<double> z;
    std::vector<bool> rejections;
};

/*
 * Draws comparison z-statistics for one design. Each (row, period) cell
 * owns a counter-based normal stream keyed by (seed, replication, cell), so
 * replications can run in any order on any thread.
 *
 *  - patient level:        every outcome is drawn and summed;
 *  - sufficient statistic: one N(0,1) per cell gives the cell sum as
 *                          n*mu + sqrt(n)*xi.
 *
 * Only controls recruited while an arm is active enter its comparison.
 */
class ZStatSimulator {
public:
    ZStatSimulator(const PlatformDesign& design, std::vector<double> effects, SimulationMode mode);

    void simulate(const Philox4x32& gen, std::uint64_t replication, std::vector<double>& z) const;

    std::size_t comparisons() const noexcept { return arms_.size(); }

private:
    struct Cell {
        std::size_t row;
        std::uint32_t stream;
        std::uint32_t period;
        int n;
        double mean;
    };
    struct Arm {
        std::size_t treatment_row;
        std::size_t control_row;
        std::vector<std::size_t> periods;
        double n_treatment;
        double n_control;
        double se;
    };

    std::vector<Cell> cells_;
    std::vector<Arm> arms_;
    std::size_t rows_;
    std::size_t periods_;
    SimulationMode mode_;
};

std::vector<double> simulate_zstats(const PlatformDesign& design,
                                    const std::vector<double>& effects, std::uint64_t seed,
                                    std::uint64_t replication,
                                    SimulationMode mode = SimulationMode::sufficient_statistic);

ReplicationResult run_replication(const ScenarioConfig& config, std::uint64_t replication);

/*
 * Runs config.reps replications split over `workers` threads. Partial tallies
 * are merged in replication order, so the result does not depend on the
 * worker count.
 */
OperatingCharacteristics run_scenario(const ScenarioConfig& config, unsigned workers = 1);

}  // namespace platform
