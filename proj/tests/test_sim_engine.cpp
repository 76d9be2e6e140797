#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <platform/error.hpp>
#include <platform/sim_engine.hpp>

#include <cmath>

using namespace platform;

namespace {

struct Moments {
    std::vector<double> mean, var;
    double corr13 = 0;
};

Moments moments(const PlatformDesign& d, const std::vector<double>& effects, int reps,
                SimulationMode mode = SimulationMode::sufficient_statistic)
{
    const std::size_t m = d.arms();
    std::vector<double> s1(m), s2(m);
    double s13 = 0;
    for (int r = 0; r < reps; ++r) {
        const auto z = simulate_zstats(d, effects, 77, std::uint64_t(r), mode);
        for (std::size_t j = 0; j < m; ++j) {
            s1[j] += z[j];
            s2[j] += z[j] * z[j];
        }
        s13 += z.front() * z.back();
    }
    Moments out;
    for (std::size_t j = 0; j < m; ++j) {
        out.mean.push_back(s1[j] / reps);
        out.var.push_back(s2[j] / reps - out.mean[j] * out.mean[j]);
    }
    const double cov = s13 / reps - out.mean.front() * out.mean.back();
    out.corr13 = cov / std::sqrt(out.var.front() * out.var.back());
    return out;
}

bool same(const OperatingCharacteristics& a, const OperatingCharacteristics& b)
{
    if (a.fwer.value != b.fwer.value || a.pfer.value != b.pfer.value || a.pfer.mc_se != b.pfer.mc_se)
        return false;
    for (const auto& [k, e] : a.kfwer)
        if (b.kfwer.at(k).value != e.value) return false;
    for (std::size_t j = 0; j < a.rejection_rate.size(); ++j)
        if (a.rejection_rate[j].value != b.rejection_rate[j].value) return false;
    return true;
}

ScenarioConfig null_config(PlatformDesign d, AdjustmentMethod method = AdjustmentMethod::unadjusted)
{
    const std::size_t m = d.arms();
    return ScenarioConfig{std::move(d), std::vector<double>(m, 0.0), AdjustmentPolicy{method}};
}

}  // namespace

TEST_CASE("mean shift of the effective comparison")
{
    const auto d = build_fixed_design(3, 150, ControlMode::common);
    const auto mo = moments(d, {0.38, 0, 0}, 50000);
    CHECK(mo.mean[0] == doctest::Approx(0.38 * std::sqrt(75.0)).epsilon(0.02 / 3.291));
    CHECK(std::abs(mo.mean[0] - 3.291) <= 0.02);
}

TEST_CASE("global null gives standard normal margins")
{
    for (const auto& d : {build_fixed_design(3, 150, ControlMode::common), build_staggered_design(150, 80),
                          build_fixed_design(3, 150, ControlMode::individual)}) {
        const auto mo = moments(d, {0, 0, 0}, 50000);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(std::abs(mo.mean[j]) <= 0.015);
            CHECK(std::abs(mo.var[j] - 1) <= 0.02);
        }
    }
    CHECK(std::abs(moments(build_staggered_design(150, 150), {0, 0, 0}, 50000).corr13) <= 0.015);
}

TEST_CASE("patient-level mode has the same distribution")
{
    const auto d = build_staggered_design(40, 15);
    const auto mo = moments(d, {0.2, 0, 0}, 20000, SimulationMode::patient_level);
    CHECK(std::abs(mo.mean[0] - 0.2 * std::sqrt(20.0)) <= 4 * std::sqrt(1.0 / 20000));
    CHECK(std::abs(mo.var[2] - 1) <= 0.04);
}

TEST_CASE("single-comparison FWER equals alpha")
{
    for (auto mode : {ControlMode::common, ControlMode::individual}) {
        const auto oc = run_scenario(null_config(build_fixed_design(1, 150, mode)));
        CHECK(std::abs(oc.fwer.value - 0.05) <= 0.004);
    }
}

TEST_CASE("case-study FWER")
{
    auto cc = run_scenario(null_config(build_fixed_design(3, 150, ControlMode::common)));
    CHECK(std::abs(cc.fwer.value - 0.1247) <= 0.006);
    auto ic = run_scenario(null_config(build_fixed_design(3, 150, ControlMode::individual)));
    CHECK(std::abs(ic.fwer.value - 0.1400) <= 0.006);
}

TEST_CASE("individual controls match the independent closed form")
{
    for (std::size_t m : {2, 5, 10}) {
        const auto oc = run_scenario(null_config(build_fixed_design(m, 100, ControlMode::individual)));
        const double closed = 1 - std::pow(0.95, double(m));
        CHECK(std::abs(oc.fwer.value - closed) <= 4 * oc.fwer.mc_se);
    }
}

TEST_CASE("PFER equals the sum of per-comparison rejection rates")
{
    auto cfg = null_config(build_staggered_design(150, 60));
    cfg.effects = {0.0, 0.3, 0.0};
    cfg.reps = 20000;
    const auto oc = run_scenario(cfg);
    CHECK(oc.pfer.value == doctest::Approx(oc.rejection_rate[0].value + oc.rejection_rate[2].value).epsilon(1e-14));
}

TEST_CASE("results do not depend on the worker count")
{
    auto cfg = null_config(build_staggered_design(150, 80), AdjustmentMethod::dunnett);
    cfg.reps = 30001;
    const auto one = run_scenario(cfg, 1);
    CHECK(same(one, run_scenario(cfg, 1)));
    CHECK(same(one, run_scenario(cfg, 2)));
    CHECK(same(one, run_scenario(cfg, 7)));
}

TEST_CASE("patient-level and sufficient-statistic modes agree")
{
    for (const auto& d : {build_fixed_design(3, 150, ControlMode::common), build_staggered_design(150, 80),
                          build_fixed_design(3, 150, ControlMode::individual)}) {
        auto cfg = null_config(d);
        cfg.reps = 20000;
        const auto suff = run_scenario(cfg);
        cfg.mode = SimulationMode::patient_level;
        const auto pat = run_scenario(cfg, 2);
        const double se = std::hypot(suff.fwer.mc_se, pat.fwer.mc_se);
        CHECK(std::abs(suff.fwer.value - pat.fwer.value) <= 4 * se);
    }
}

TEST_CASE("configuration validation")
{
    auto cfg = null_config(build_fixed_design(3, 10, ControlMode::common));
    cfg.effects = {0, 0};
    CHECK_THROWS_AS(run_scenario(cfg), invalid_argument);
    cfg.effects = {0, 0, 0};
    cfg.reps = 0;
    CHECK_THROWS_AS(run_scenario(cfg), invalid_argument);
    cfg.reps = 10;
    cfg.k_list = {0};
    CHECK_THROWS_AS(run_scenario(cfg), invalid_argument);
    CHECK(simulation_mode_from_string("patient") == SimulationMode::patient_level);
    CHECK(simulation_mode_from_string("sufficient") == SimulationMode::sufficient_statistic);
    CHECK_THROWS_AS(simulation_mode_from_string("fast"), invalid_argument);
}

TEST_CASE("single replication is reproducible")
{
    auto cfg = null_config(build_fixed_design(4, 30, ControlMode::common));
    const auto a = run_replication(cfg, 123), b = run_replication(cfg, 123), c = run_replication(cfg, 124);
    CHECK(a.z == b.z);
    CHECK(a.z != c.z);
    CHECK(a.rejections.size() == 4);
}
