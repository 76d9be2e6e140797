#pragma once
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace platform {

/* Outcome counts of one replication: V, S, R, m0 and m. */
struct RejectionTally {
    int false_rejections = 0;
    int true_rejections = 0;
    int rejections = 0;
    int true_nulls = 0;
    int comparisons = 0;
    std::vector<bool> rejected;
    std::vector<bool> null_false;
};

RejectionTally tally_outcomes(const std::vector<bool>& rejections,
                              const std::vector<bool>& null_false);

struct Estimate {
    double value = 0.0;
    double mc_se = 0.0;
};

/*
 * Monte Carlo error and power estimates. Power entries are empty when no
 * null hypothesis is false (and marginal power is empty for null arms).
 */
struct OperatingCharacteristics {
    std::int64_t reps = 0;
    int comparisons = 0;
    int true_nulls = 0;
    Estimate fwer;
    std::map<int, Estimate> kfwer;
    Estimate pfer;
    std::vector<Estimate> rejection_rate;
    std::vector<std::optional<Estimate>> marginal_power;
    std::optional<Estimate> disjunctive_power;
    std::optional<Estimate> conjunctive_power;
};

/*
 * Streaming sufficient statistics for OperatingCharacteristics. All state is
 * integer counts, so merging partial accumulators in any order gives the
 * same result.
 */
class TallyAccumulator {
public:
    explicit TallyAccumulator(std::vector<bool> null_false);

    void add(const std::vector<bool>& rejected);
    void add(const RejectionTally& tally);
    void merge(const TallyAccumulator& other);

    std::int64_t reps() const noexcept { return reps_; }
    OperatingCharacteristics finalize(const std::vector<int>& k_list) const;

private:
    std::vector<bool> null_false_;
    int true_nulls_ = 0;
    std::int64_t reps_ = 0;
    std::vector<std::int64_t> v_histogram_;
    std::vector<std::int64_t> arm_rejections_;
    std::int64_t any_true_ = 0;
    std::int64_t all_true_ = 0;
};

OperatingCharacteristics aggregate_characteristics(const std::vector<RejectionTally>& tallies,
                                                   const std::vector<int>& k_list);

}  // namespace platform
