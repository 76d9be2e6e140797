#include <platform/adjust.hpp>
#include <platform/error.hpp>

#include <cmath>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <tuple>

namespace platform {

std::string to_string(AdjustmentMethod method)
{
    switch (method) {
        case AdjustmentMethod::unadjusted: return "unadjusted";
        case AdjustmentMethod::bonferroni: return "bonferroni";
        case AdjustmentMethod::dunnett: return "dunnett";
    }
    return "unknown";
}

AdjustmentMethod adjustment_from_string(const std::string& s)
{
    if (s == "unadjusted") return AdjustmentMethod::unadjusted;
    if (s == "bonferroni") return AdjustmentMethod::bonferroni;
    if (s == "dunnett") return AdjustmentMethod::dunnett;
    throw invalid_argument("unknown adjustment '" + s + "'");
}

std::string to_string(Sidedness sidedness)
{
    return sidedness == Sidedness::two_sided ? "two_sided" : "one_sided";
}

Sidedness sidedness_from_string(const std::string& s)
{
    if (s == "two_sided") return Sidedness::two_sided;
    if (s == "one_sided") return Sidedness::one_sided;
    throw invalid_argument("unknown sidedness '" + s + "'");
}

void AdjustmentPolicy::validate() const
{
    if (!(alpha > 0.0 && alpha < 1.0)) throw invalid_argument("alpha must lie in (0, 1)");
}

namespace {

using CacheKey = std::tuple<std::vector<double>, double, Sidedness>;

class DunnettCache {
public:
    double get(const CorrelationMatrix& corr, double alpha, Sidedness sidedness)
    {
        const auto& m = corr.matrix();
        CacheKey key{std::vector<double>(m.data(), m.data() + m.size()), alpha, sidedness};
        {
            std::shared_lock lock(mtx_);
            if (auto it = values_.find(key); it != values_.end()) return it->second;
        }
        const double c = dunnett_critical_value(MvnSpec(corr), alpha, sidedness);
        std::unique_lock lock(mtx_);
        return values_.emplace(std::move(key), c).first->second;
    }

private:
    std::shared_mutex mtx_;
    std::map<CacheKey, double> values_;
};

DunnettCache& dunnett_cache()
{
    static DunnettCache cache;
    return cache;
}

}  // namespace

double rejection_threshold(const AdjustmentPolicy& policy, const CorrelationMatrix& corr)
{
    policy.validate();
    const double tail = policy.sidedness == Sidedness::two_sided ? policy.alpha / 2.0 : policy.alpha;
    switch (policy.method) {
        case AdjustmentMethod::unadjusted: return normal_quantile(1.0 - tail);
        case AdjustmentMethod::bonferroni: return normal_quantile(1.0 - tail / double(corr.dim()));
        case AdjustmentMethod::dunnett: return dunnett_cache().get(corr, policy.alpha, policy.sidedness);
    }
    throw invalid_argument("unknown adjustment method");
}

bool exceeds(double z, double threshold, Sidedness sidedness)
{
    return (sidedness == Sidedness::two_sided ? std::abs(z) : z) > threshold;
}

std::vector<bool> decide_rejections(const std::vector<double>& z, const AdjustmentPolicy& policy,
                                    const CorrelationMatrix& corr)
{
    if (z.size() != corr.dim())
        throw invalid_argument("z has " + std::to_string(z.size()) +
                               " entries but the correlation matrix is " +
                               std::to_string(corr.dim()) + "-dimensional");
    const double c = rejection_threshold(policy, corr);
    std::vector<bool> out(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) out[j] = exceeds(z[j], c, policy.sidedness);
    return out;
}

}  // namespace platform
