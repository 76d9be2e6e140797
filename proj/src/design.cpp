#include <platform/design.hpp>
#include <platform/error.hpp>

#include <algorithm>
#include <numeric>
#include <nlohmann/json.hpp>

namespace platform {

std::string to_string(ControlMode mode)
{
    return mode == ControlMode::common ? "common" : "individual";
}

ControlMode control_mode_from_string(const std::string& s)
{
    if (s == "common") return ControlMode::common;
    if (s == "individual") return ControlMode::individual;
    throw invalid_argument("unknown control mode '" + s + "'");
}

namespace {

bool column_empty(const Schedule& s, std::size_t t)
{
    return std::all_of(s.begin(), s.end(), [t](const auto& row) { return row[t] == 0; });
}

/* Nonzero entries must form one run once globally empty periods are ignored. */
bool contiguous(const Schedule& s, std::size_t row)
{
    int runs = 0;
    bool in_run = false;
    for (std::size_t t = 0; t < s[row].size(); ++t) {
        if (column_empty(s, t)) continue;
        bool on = s[row][t] > 0;
        if (on && !in_run) ++runs;
        in_run = on;
    }
    return runs <= 1;
}

}  // namespace

PlatformDesign::PlatformDesign(ControlMode mode, std::size_t arms, Schedule schedule)
    : mode_(mode), arms_(arms), periods_(0), schedule_(std::move(schedule))
{
    if (arms_ == 0) throw invalid_argument("design needs at least one experimental arm");
    const std::size_t expected_rows = mode_ == ControlMode::common ? arms_ + 1 : 2 * arms_;
    if (schedule_.size() != expected_rows)
        throw invalid_argument("schedule has " + std::to_string(schedule_.size()) +
                               " rows, expected " + std::to_string(expected_rows));
    periods_ = schedule_.front().size();
    if (periods_ == 0) throw invalid_argument("design needs at least one period");

    for (std::size_t r = 0; r < schedule_.size(); ++r) {
        const auto& row = schedule_[r];
        if (row.size() != periods_) throw invalid_argument("ragged schedule matrix");
        if (std::any_of(row.begin(), row.end(), [](int v) { return v < 0; }))
            throw invalid_argument("negative patient count in row " + std::to_string(r));
        if (row_total(r) == 0)
            throw invalid_argument("row " + std::to_string(r) + " recruits no patients");
        if (!contiguous(schedule_, r))
            throw invalid_argument("row " + std::to_string(r) +
                                   " has non-contiguous recruitment");
    }

    if (mode_ == ControlMode::individual) {
        for (std::size_t j = 0; j < arms_; ++j)
            for (std::size_t t = 0; t < periods_; ++t)
                if ((schedule_[control_row(j)][t] > 0) != (schedule_[treatment_row(j)][t] > 0))
                    throw invalid_argument("control of arm " + std::to_string(j + 1) +
                                           " is not active exactly with its arm");
    }
}

int PlatformDesign::count(std::size_t row, std::size_t period) const
{
    return schedule_.at(row).at(period);
}

int PlatformDesign::row_total(std::size_t row) const
{
    const auto& r = schedule_.at(row);
    return std::accumulate(r.begin(), r.end(), 0);
}

void PlatformDesign::check_arm(std::size_t arm) const
{
    if (arm >= arms_)
        throw invalid_argument("arm index " + std::to_string(arm) + " out of range [0, " +
                               std::to_string(arms_) + ")");
}

std::size_t PlatformDesign::treatment_row(std::size_t arm) const
{
    check_arm(arm);
    return mode_ == ControlMode::common ? arm + 1 : arms_ + arm;
}

std::size_t PlatformDesign::control_row(std::size_t arm) const
{
    check_arm(arm);
    return mode_ == ControlMode::common ? 0 : arm;
}

bool PlatformDesign::active(std::size_t arm, std::size_t period) const
{
    return count(treatment_row(arm), period) > 0;
}

int PlatformDesign::treatment_total(std::size_t arm) const
{
    return row_total(treatment_row(arm));
}

PlatformDesign PlatformDesign::compact() const
{
    Schedule out(schedule_.size());
    for (std::size_t t = 0; t < periods_; ++t) {
        if (column_empty(schedule_, t)) continue;
        for (std::size_t r = 0; r < schedule_.size(); ++r) out[r].push_back(schedule_[r][t]);
    }
    return PlatformDesign(mode_, arms_, std::move(out));
}

std::vector<std::string> PlatformDesign::row_labels() const
{
    std::vector<std::string> labels;
    if (mode_ == ControlMode::common) {
        labels.push_back("control");
    } else {
        for (std::size_t j = 0; j < arms_; ++j) labels.push_back("control" + std::to_string(j + 1));
    }
    for (std::size_t j = 0; j < arms_; ++j) labels.push_back("arm" + std::to_string(j + 1));
    return labels;
}

PlatformDesign build_single_period_design(std::size_t m, int treatment_n, int control_n,
                                          ControlMode mode)
{
    if (m == 0) throw invalid_argument("m must be at least 1");
    if (treatment_n <= 0 || control_n <= 0)
        throw invalid_argument("per-arm sample sizes must be positive");
    Schedule s;
    const std::size_t controls = mode == ControlMode::common ? 1 : m;
    for (std::size_t i = 0; i < controls; ++i) s.push_back({control_n});
    for (std::size_t i = 0; i < m; ++i) s.push_back({treatment_n});
    return PlatformDesign(mode, m, std::move(s));
}

PlatformDesign build_fixed_design(std::size_t m, int n_per_arm, ControlMode mode)
{
    if (n_per_arm <= 0) throw invalid_argument("n_per_arm must be at least 1");
    return build_single_period_design(m, n_per_arm, n_per_arm, mode);
}

PlatformDesign build_staggered_design(int n_per_arm, int shift)
{
    if (n_per_arm <= 0) throw invalid_argument("n_per_arm must be at least 1");
    if (shift < 0 || shift > n_per_arm)
        throw invalid_argument("shift must lie in [0, n_per_arm]");
    const int overlap = n_per_arm - shift;
    Schedule s = {
        {shift, overlap, shift},  // control
        {shift, overlap, 0},
        {shift, overlap, 0},
        {0, overlap, shift},
    };
    return PlatformDesign(ControlMode::common, 3, std::move(s));
}

int BudgetAllocation::sponsor_funded() const
{
    const std::size_t late = design.treatment_row(2);
    const std::size_t last = design.periods() - 1;
    return design.row_total(late) + design.count(0, last) + sponsor_control_share;
}

BudgetAllocation build_budget_design(int shift, int budget, ContributionFraction fraction,
                                     int early_n)
{
    if (early_n <= 0) throw invalid_argument("early_n must be positive");
    if (shift < 0 || shift > early_n) throw invalid_argument("shift must lie in [0, early_n]");
    if (budget <= 0) throw invalid_argument("budget must be positive");
    if (fraction.den <= 0 || fraction.num < 0 || fraction.num > fraction.den)
        throw invalid_argument("contribution fraction must lie in [0, 1]");

    const long long p2 = early_n - shift;
    const long long den = fraction.den;
    // Everything below is scaled by `den` to stay in integers.
    const long long contribution_scaled = p2 * fraction.num;
    const long long remainder_scaled = budget * den - contribution_scaled - p2 * den;
    if (remainder_scaled < 0)
        throw invalid_argument("budget " + std::to_string(budget) +
                               " cannot cover the period-2 contribution");

    // comparison_n = p2 + remainder / 2, rounded half-up.
    const long long twice_scaled = 2 * p2 * den + remainder_scaled;
    long long comparison_n = (twice_scaled + den) / (2 * den);
    // The share may go negative only when rounding up overshoots a zero fraction.
    if (budget + p2 - 2 * comparison_n < 0) --comparison_n;
    const long long late_period3 = comparison_n - p2;
    const long long share = budget - 2 * late_period3 - p2;

    Schedule s = {
        {shift, static_cast<int>(p2), static_cast<int>(late_period3)},
        {shift, static_cast<int>(p2), 0},
        {shift, static_cast<int>(p2), 0},
        {0, static_cast<int>(p2), static_cast<int>(late_period3)},
    };
    return BudgetAllocation{shift, budget, PlatformDesign(ControlMode::common, 3, std::move(s)),
                            static_cast<int>(comparison_n), static_cast<int>(share)};
}

int concurrent_control_count(const PlatformDesign& design, std::size_t arm)
{
    const std::size_t c = design.control_row(arm);
    int total = 0;
    for (std::size_t t = 0; t < design.periods(); ++t)
        if (design.active(arm, t)) total += design.count(c, t);
    return total;
}

int shared_control_count(const PlatformDesign& design, std::size_t arm_a, std::size_t arm_b)
{
    if (arm_a == arm_b) throw invalid_argument("shared control count needs two distinct arms");
    const std::size_t ca = design.control_row(arm_a);
    if (ca != design.control_row(arm_b)) return 0;
    int total = 0;
    for (std::size_t t = 0; t < design.periods(); ++t)
        if (design.active(arm_a, t) && design.active(arm_b, t)) total += design.count(ca, t);
    return total;
}

int total_sample_size(const PlatformDesign& design)
{
    int total = 0;
    for (std::size_t r = 0; r < design.rows(); ++r) total += design.row_total(r);
    return total;
}

void to_json(nlohmann::json& j, const PlatformDesign& design)
{
    j = nlohmann::json{{"control_mode", to_string(design.control_mode())},
                       {"arms", design.row_labels()},
                       {"matrix", design.schedule()}};
}

PlatformDesign design_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) throw config_error("design", "expected an object");
    for (const auto& [key, _] : j.items())
        if (key != "control_mode" && key != "arms" && key != "matrix")
            throw config_error("design." + key, "unknown key");
    if (!j.contains("control_mode") || !j.contains("matrix"))
        throw config_error("design", "requires control_mode and matrix");

    ControlMode mode;
    try {
        mode = control_mode_from_string(j.at("control_mode").get<std::string>());
    } catch (const std::exception& e) {
        throw config_error("design.control_mode", e.what());
    }

    Schedule s;
    try {
        s = j.at("matrix").get<Schedule>();
    } catch (const nlohmann::json::exception& e) {
        throw config_error("design.matrix", "expected a matrix of integers");
    }
    const std::size_t rows = s.size();
    std::size_t arms = mode == ControlMode::common ? (rows > 0 ? rows - 1 : 0) : rows / 2;
    if (mode == ControlMode::individual && rows % 2 != 0)
        throw config_error("design.matrix", "individual-control designs need an even row count");

    try {
        PlatformDesign d(mode, arms, std::move(s));
        if (j.contains("arms") && j.at("arms").get<std::vector<std::string>>() != d.row_labels())
            throw config_error("design.arms", "labels do not match the row layout");
        return d;
    } catch (const invalid_argument& e) {
        throw config_error("design.matrix", e.what());
    }
}

}  // namespace platform
