#pragma once
#include <cstddef>
#include <string>
#include <vector>
#include <nlohmann/json_fwd.hpp>

namespace platform {

enum class ControlMode { common, individual };

std::string to_string(ControlMode mode);
ControlMode control_mode_from_string(const std::string& s);

using Schedule = std::vector<std::vector<int>>;

/*
 * Recruitment schedule of a platform trial.
 *
 * Rows are recruitment streams and columns are recruitment periods; entry
 * (r, t) is the number of patients randomized to row r during period t.
 *
 *  - common control:     row 0 is the shared control, rows 1..m are the
 *                        experimental arms.
 *  - individual control: rows 0..m-1 are the controls paired with arms
 *                        1..m, rows m..2m-1 are the experimental arms.
 *
 * Experimental arms are addressed by a 0-based arm index in [0, m).
 * An arm is active in period t when it recruits at least one patient there.
 * A design is immutable once constructed.
 */
class PlatformDesign {
public:
    /* Validates the schedule and throws invalid_argument on any violation. */
    PlatformDesign(ControlMode mode, std::size_t arms, Schedule schedule);

    ControlMode control_mode() const noexcept { return mode_; }
    std::size_t arms() const noexcept { return arms_; }
    std::size_t periods() const noexcept { return periods_; }
    std::size_t rows() const noexcept { return schedule_.size(); }
    const Schedule& schedule() const noexcept { return schedule_; }

    int count(std::size_t row, std::size_t period) const;
    int row_total(std::size_t row) const;

    std::size_t treatment_row(std::size_t arm) const;
    std::size_t control_row(std::size_t arm) const;

    bool active(std::size_t arm, std::size_t period) const;
    int treatment_total(std::size_t arm) const;

    /* Drops periods in which nobody is recruited. */
    PlatformDesign compact() const;

    /* Labels matching the row layout, e.g. "control", "arm1". */
    std::vector<std::string> row_labels() const;

    friend bool operator==(const PlatformDesign&, const PlatformDesign&) = default;

private:
    void check_arm(std::size_t arm) const;

    ControlMode mode_;
    std::size_t arms_;
    std::size_t periods_;
    Schedule schedule_;
};

/* Single-period design with n_per_arm patients in every row. */
PlatformDesign build_fixed_design(std::size_t m, int n_per_arm, ControlMode mode);

/*
 * Single-period design with distinct treatment and control sizes. Under
 * individual controls every paired control receives `control_n`.
 */
PlatformDesign build_single_period_design(std::size_t m, int treatment_n, int control_n,
                                          ControlMode mode);

/*
 * Three arms with a common control; arm 3 joins after `shift` patients per
 * arm. Period columns are (shift, n_per_arm - shift, shift). Every
 * treatment-control comparison has n_per_arm patients per side.
 */
PlatformDesign build_staggered_design(int n_per_arm, int shift);

/* Share of period-2 control recruitment funded by the joining sponsor. */
struct ContributionFraction {
    long long num = 1;
    long long den = 3;
};

struct BudgetAllocation {
    int shift;
    int budget;
    PlatformDesign design;
    /* Per-side size of the late arm's comparison. */
    int comparison_n;
    /* Period-2 control patients paid for by the joining sponsor. */
    int sponsor_control_share;

    /* Late-arm treatment patients plus period-3 controls plus the share above. */
    int sponsor_funded() const;
};

/*
 * Budget-driven flexible platform: arms 1 and 2 recruit `early_n` patients
 * per comparison, arm 3 joins after `shift` and its sponsor spends `budget`
 * patients. Arithmetic is exact rational; the comparison size is rounded
 * half-up and the sponsor's control share absorbs the rounding.
 */
BudgetAllocation build_budget_design(int shift, int budget,
                                     ContributionFraction fraction = {},
                                     int early_n = 150);

/* Control patients recruited while arm j is active (n_0^j). */
int concurrent_control_count(const PlatformDesign& design, std::size_t arm);

/* Control patients recruited while both arms are active. */
int shared_control_count(const PlatformDesign& design, std::size_t arm_a, std::size_t arm_b);

int total_sample_size(const PlatformDesign& design);

void to_json(nlohmann::json& j, const PlatformDesign& design);
PlatformDesign design_from_json(const nlohmann::json& j);

}  // namespace platform
