#pragma once
#include <cstdint>
#include <functional>
#include <string>
#include <platform/adjust.hpp>
#include <platform/design.hpp>
#include <platform/sim_engine.hpp>

namespace platform {

/* Marginal power requirement; the test level comes from the AdjustmentPolicy. */
struct PowerTarget {
    double target = 0.9;
    double delta = 0.38;

    void validate() const;
};

/*
 * Phi(delta * sqrt(n/2) - z_{1 - alpha_local/2}): two-arm z-test power with
 * the opposite rejection tail ignored.
 */
double analytic_two_arm_power(double n, double delta, double alpha_local);

/*
 * Exact rejection probability of one comparison whose arm mean is `delta`,
 * using the design's concurrent-control sizes and the policy's threshold.
 * Both tails are counted for two-sided tests.
 */
double exact_marginal_power(const PlatformDesign& design, std::size_t arm, double delta,
                            const AdjustmentPolicy& policy);

/* Maps a per-arm sample size to a design; one arm carries the effect. */
struct DesignTemplate {
    std::string name;
    std::function<PlatformDesign(int)> build;
    std::size_t effective_arm = 0;
    std::size_t arms = 1;
};

DesignTemplate fixed_template(std::size_t m, ControlMode mode);

/* Staggered three-arm design with arm 3 effective; shift is capped at n. */
DesignTemplate staggered_template(int shift);

enum class SearchMethod { analytic, monte_carlo };

struct SearchOptions {
    SearchMethod method = SearchMethod::monte_carlo;
    std::int64_t reps = kDefaultReps;
    std::uint64_t seed = kDefaultSeed;
    SimulationMode mode = SimulationMode::sufficient_statistic;
    unsigned workers = 1;
    int max_n = 1'000'000;
};

struct SampleSizeResult {
    int n = 0;
    /* Marginal power at n (MC estimate for the MC search, exact otherwise). */
    double power = 0.0;
    double mc_se = 0.0;
    /* Answer of the exact-power search used to initialise the MC search. */
    int analytic_n = 0;
};

/*
 * Smallest per-arm n whose marginal power reaches the target.
 *
 * The analytic method bisects exact_marginal_power over integers. The Monte
 * Carlo method starts from that answer, brackets it where the exact power
 * is 2 MC standard errors below/above the target, checks the bracket by
 * simulation, then bisects on simulated power with the same seed for every
 * candidate (common random numbers).
 */
SampleSizeResult required_per_arm_n(const PowerTarget& target, const AdjustmentPolicy& policy,
                                    const DesignTemplate& tmpl, const SearchOptions& options = {});

struct FixedTotalSplit {
    int treatment_n = 0;
    /* Per control arm (every paired control under individual controls). */
    int control_n = 0;
    int allocated = 0;
};

/*
 * Splits a fixed total. Common control: floor(N / (m + ratio)) per
 * treatment arm and floor(ratio * N / (m + ratio)) for the control.
 * Individual controls: floor(N / 2m) in every row. Leftover patients are
 * not allocated.
 */
FixedTotalSplit split_fixed_total(int total, std::size_t m, ControlMode mode,
                                  double control_ratio = 1.0);

PlatformDesign design_from_split(const FixedTotalSplit& split, std::size_t m, ControlMode mode);

}  // namespace platform
