#include <platform/metrics.hpp>
#include <platform/error.hpp>

#include <cmath>

namespace platform {

RejectionTally tally_outcomes(const std::vector<bool>& rejections,
                              const std::vector<bool>& null_false)
{
    if (rejections.size() != null_false.size())
        throw invalid_argument("rejection and truth vectors differ in length");
    RejectionTally t;
    t.comparisons = static_cast<int>(rejections.size());
    t.rejected = rejections;
    t.null_false = null_false;
    for (std::size_t j = 0; j < rejections.size(); ++j) {
        if (!null_false[j]) ++t.true_nulls;
        if (!rejections[j]) continue;
        ++t.rejections;
        ++(null_false[j] ? t.true_rejections : t.false_rejections);
    }
    return t;
}

TallyAccumulator::TallyAccumulator(std::vector<bool> null_false)
    : null_false_(std::move(null_false)),
      v_histogram_(null_false_.size() + 1, 0),
      arm_rejections_(null_false_.size(), 0)
{
    for (bool f : null_false_) true_nulls_ += f ? 0 : 1;
}

void TallyAccumulator::add(const std::vector<bool>& rejected)
{
    if (rejected.size() != null_false_.size())
        throw invalid_argument("rejection vector has the wrong length");
    int v = 0, s = 0;
    for (std::size_t j = 0; j < rejected.size(); ++j) {
        if (!rejected[j]) continue;
        ++arm_rejections_[j];
        ++(null_false_[j] ? s : v);
    }
    ++v_histogram_[static_cast<std::size_t>(v)];
    const int false_nulls = static_cast<int>(null_false_.size()) - true_nulls_;
    if (s >= 1) ++any_true_;
    if (s == false_nulls) ++all_true_;
    ++reps_;
}

void TallyAccumulator::add(const RejectionTally& tally)
{
    if (tally.null_false != null_false_)
        throw invalid_argument("tally truth vector differs from the accumulator's");
    add(tally.rejected);
}

void TallyAccumulator::merge(const TallyAccumulator& other)
{
    if (other.null_false_ != null_false_)
        throw invalid_argument("cannot merge accumulators with different truth vectors");
    reps_ += other.reps_;
    for (std::size_t i = 0; i < v_histogram_.size(); ++i) v_histogram_[i] += other.v_histogram_[i];
    for (std::size_t j = 0; j < arm_rejections_.size(); ++j)
        arm_rejections_[j] += other.arm_rejections_[j];
    any_true_ += other.any_true_;
    all_true_ += other.all_true_;
}

namespace {

Estimate proportion(std::int64_t hits, std::int64_t n)
{
    const double p = double(hits) / double(n);
    return {p, std::sqrt(p * (1.0 - p) / double(n))};
}

}  // namespace

OperatingCharacteristics TallyAccumulator::finalize(const std::vector<int>& k_list) const
{
    if (reps_ == 0) throw invalid_argument("no replications to aggregate");
    OperatingCharacteristics oc;
    const int m = static_cast<int>(null_false_.size());
    oc.reps = reps_;
    oc.comparisons = m;
    oc.true_nulls = true_nulls_;

    auto at_least = [&](int k) {
        std::int64_t c = 0;
        for (int v = std::max(k, 0); v <= m; ++v) c += v_histogram_[static_cast<std::size_t>(v)];
        return c;
    };
    oc.fwer = proportion(at_least(1), reps_);
    oc.kfwer[1] = oc.fwer;
    for (int k : k_list) {
        if (k < 1) throw invalid_argument("k-FWER needs k >= 1");
        oc.kfwer[k] = proportion(at_least(k), reps_);
    }

    double sum = 0.0, sum_sq = 0.0;
    for (int v = 0; v <= m; ++v) {
        const double c = double(v_histogram_[static_cast<std::size_t>(v)]);
        sum += c * v;
        sum_sq += c * v * v;
    }
    const double n = double(reps_);
    const double mean = sum / n;
    const double var = reps_ > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
    oc.pfer = {mean, std::sqrt(var / n)};

    for (int j = 0; j < m; ++j) {
        const Estimate rate = proportion(arm_rejections_[static_cast<std::size_t>(j)], reps_);
        oc.rejection_rate.push_back(rate);
        oc.marginal_power.push_back(null_false_[static_cast<std::size_t>(j)]
                                        ? std::optional<Estimate>(rate)
                                        : std::nullopt);
    }
    if (true_nulls_ < m) {
        oc.disjunctive_power = proportion(any_true_, reps_);
        oc.conjunctive_power = proportion(all_true_, reps_);
    }
    return oc;
}

OperatingCharacteristics aggregate_characteristics(const std::vector<RejectionTally>& tallies,
                                                   const std::vector<int>& k_list)
{
    if (tallies.empty()) throw invalid_argument("no tallies to aggregate");
    TallyAccumulator acc(tallies.front().null_false);
    for (const auto& t : tallies) acc.add(t);
    return acc.finalize(k_list);
}

}  // namespace platform
