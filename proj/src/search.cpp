#include <platform/search.hpp>
#include <platform/correlation.hpp>
#include <platform/error.hpp>

#include <algorithm>
#include <cmath>

namespace platform {

void PowerTarget::validate() const
{
    if (!(target > 0.0 && target < 1.0)) throw invalid_argument("power target must lie in (0, 1)");
    if (!(delta > 0.0)) throw invalid_argument("effect size must be positive");
}

double analytic_two_arm_power(double n, double delta, double alpha_local)
{
    if (!(n >= 1.0)) throw invalid_argument("n must be at least 1");
    return normal_cdf(delta * std::sqrt(n / 2.0) - normal_quantile(1.0 - alpha_local / 2.0));
}

double exact_marginal_power(const PlatformDesign& design, std::size_t arm, double delta,
                            const AdjustmentPolicy& policy)
{
    const double c = rejection_threshold(policy, analytic_correlation(design));
    const double n_t = design.treatment_total(arm);
    const double n_c = concurrent_control_count(design, arm);
    const double mu = delta / std::sqrt(1.0 / n_t + 1.0 / n_c);
    if (policy.sidedness == Sidedness::one_sided) return normal_cdf(mu - c);
    return normal_cdf(mu - c) + normal_cdf(-mu - c);
}

DesignTemplate fixed_template(std::size_t m, ControlMode mode)
{
    return {"fixed_" + to_string(mode) + "_m" + std::to_string(m),
            [m, mode](int n) { return build_fixed_design(m, n, mode); }, 0, m};
}

DesignTemplate staggered_template(int shift)
{
    if (shift < 0) throw invalid_argument("shift must be non-negative");
    return {"staggered_shift" + std::to_string(shift),
            [shift](int n) { return build_staggered_design(n, std::min(shift, n)); }, 2, 3};
}

namespace {

/* Smallest n in [1, max_n] with power(n) >= goal, assuming monotone power. */
template <class Power>
int smallest_n_reaching(Power&& power, double goal, int max_n)
{
    if (power(1) >= goal) return 1;
    int lo = 1, hi = 2;
    while (power(hi) < goal) {
        lo = hi;
        if (hi >= max_n) throw convergence_error("power target not reached below max_n");
        hi = std::min(2 * hi, max_n);
    }
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        (power(mid) >= goal ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace

SampleSizeResult required_per_arm_n(const PowerTarget& target, const AdjustmentPolicy& policy,
                                    const DesignTemplate& tmpl, const SearchOptions& options)
{
    target.validate();
    policy.validate();

    auto exact = [&](int n) {
        return exact_marginal_power(tmpl.build(n), tmpl.effective_arm, target.delta, policy);
    };
    SampleSizeResult result;
    result.analytic_n = smallest_n_reaching(exact, target.target, options.max_n);
    if (options.method == SearchMethod::analytic) {
        result.n = result.analytic_n;
        result.power = exact(result.n);
        return result;
    }

    if (options.reps < kDefaultReps)
        throw invalid_argument("Monte Carlo sample-size search needs at least 50000 reps");
    std::vector<double> effects(tmpl.arms, 0.0);
    effects.at(tmpl.effective_arm) = target.delta;
    auto simulated = [&](int n) {
        ScenarioConfig cfg{tmpl.build(n), effects, policy, options.reps, options.seed, options.mode,
                           {1}};
        return *run_scenario(cfg, options.workers).marginal_power[tmpl.effective_arm];
    };

    const double se = std::sqrt(target.target * (1.0 - target.target) / double(options.reps));
    const double guard = 2.0 * se;
    int lo = std::max(0, smallest_n_reaching(exact, std::max(1e-9, target.target - guard),
                                             options.max_n) - 1);
    int hi = smallest_n_reaching(exact, std::min(1.0 - 1e-12, target.target + guard), options.max_n);

    constexpr int kMaxExpansions = 20;
    Estimate at_hi = simulated(hi);
    for (int i = 0; at_hi.value < target.target; ++i) {
        if (i == kMaxExpansions) throw convergence_error("simulated power never reached the target");
        hi += std::max(1, hi - lo);
        at_hi = simulated(hi);
    }
    for (int i = 0; lo >= 1 && simulated(lo).value >= target.target; ++i) {
        if (i == kMaxExpansions) throw convergence_error("non-monotone bracket in sample-size search");
        lo = std::max(0, lo - std::max(1, hi - lo));
    }
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        const Estimate e = simulated(mid);
        if (e.value >= target.target) {
            hi = mid;
            at_hi = e;
        } else {
            lo = mid;
        }
    }
    result.n = hi;
    result.power = at_hi.value;
    result.mc_se = at_hi.mc_se;
    return result;
}

FixedTotalSplit split_fixed_total(int total, std::size_t m, ControlMode mode, double control_ratio)
{
    if (m == 0) throw invalid_argument("m must be at least 1");
    if (!(control_ratio >= 1.0)) throw invalid_argument("control ratio must be >= 1");
    const int im = static_cast<int>(m);
    FixedTotalSplit s;
    if (mode == ControlMode::common) {
        if (total < im + 1) throw invalid_argument("total too small for m + 1 arms");
        const double unit = double(total) / (double(m) + control_ratio);
        // Guard against 600/4 landing a hair below 150.
        s.treatment_n = static_cast<int>(std::floor(unit + 1e-9));
        s.control_n = static_cast<int>(std::floor(control_ratio * unit + 1e-9));
        if (s.treatment_n < 1 || s.control_n < 1)
            throw invalid_argument("total too small for the requested control ratio");
        s.allocated = im * s.treatment_n + s.control_n;
    } else {
        if (control_ratio != 1.0)
            throw invalid_argument("control ratio applies to common-control designs only");
        if (total < 2 * im) throw invalid_argument("total too small for 2m arms");
        s.treatment_n = s.control_n = total / (2 * im);
        s.allocated = 2 * im * s.treatment_n;
    }
    return s;
}

PlatformDesign design_from_split(const FixedTotalSplit& split, std::size_t m, ControlMode mode)
{
    return build_single_period_design(m, split.treatment_n, split.control_n, mode);
}

}  // namespace platform
