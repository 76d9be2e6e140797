#include <platform/scenarios.hpp>
#include <platform/correlation.hpp>
#include <platform/error.hpp>
#include <platform/search.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace platform {

namespace {

constexpr int kArmN = 150;
constexpr double kEffect = 0.38;
constexpr int kFixedTotal = 600;
constexpr int kSponsorBudget = 300;
constexpr int kDefaultSweepStep = 10;
constexpr double kPowerTarget = 0.9;

const AdjustmentPolicy kUnadjusted{AdjustmentMethod::unadjusted, 0.05, Sidedness::two_sided};
const AdjustmentPolicy kBonferroni{AdjustmentMethod::bonferroni, 0.05, Sidedness::two_sided};
const AdjustmentPolicy kDunnett{AdjustmentMethod::dunnett, 0.05, Sidedness::two_sided};
const std::vector<AdjustmentPolicy> kAllPolicies = {kUnadjusted, kBonferroni, kDunnett};

std::string format_number(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

struct Settings {
    std::int64_t reps;
    std::uint64_t seed;
    SimulationMode mode;
    int sweep_step;
    unsigned workers;
};

Settings settings_from(const RunOverrides& o)
{
    Settings s{o.reps.value_or(kDefaultReps), o.seed.value_or(kDefaultSeed),
               o.mode.value_or(SimulationMode::sufficient_statistic),
               o.sweep_step.value_or(kDefaultSweepStep), std::max(1u, o.workers)};
    if (s.reps < 1) throw invalid_argument("reps must be at least 1");
    if (s.sweep_step < 1) throw invalid_argument("sweep step must be at least 1");
    return s;
}

std::vector<int> shift_grid(int step)
{
    std::vector<int> grid;
    for (int s = 0; s < kArmN; s += step) grid.push_back(s);
    grid.push_back(kArmN);
    return grid;
}

/* Accumulates rows and structured detail for one preset. */
class ReportBuilder {
public:
    ReportBuilder(std::string preset, std::string axis, const Settings& s) : s_(s)
    {
        report_.preset = std::move(preset);
        report_.axis = std::move(axis);
        report_.detail = {{"preset", report_.preset}, {"axis", report_.axis},
                          {"seed", s.seed},           {"reps", s.reps},
                          {"mode", to_string(s.mode)}, {"scenarios", nlohmann::json::array()}};
    }

    const Settings& settings() const { return s_; }

    void row(double sweep, const std::string& design, const std::string& adjustment,
             const std::string& metric, double estimate, std::optional<double> se,
             std::int64_t reps)
    {
        report_.rows.push_back(
            {report_.preset, sweep, design, adjustment, metric, estimate, se, reps, s_.seed});
    }

    OperatingCharacteristics scenario(double sweep, const std::string& design_label,
                                      const PlatformDesign& design,
                                      const std::vector<double>& effects,
                                      const AdjustmentPolicy& policy)
    {
        ScenarioConfig cfg{design, effects, policy, s_.reps, s_.seed, s_.mode, {1, 2, 3}};
        const auto oc = run_scenario(cfg, s_.workers);
        add_characteristics(sweep, design_label, cfg, oc);
        return oc;
    }

    void add_characteristics(double sweep, const std::string& design_label,
                             const ScenarioConfig& cfg, const OperatingCharacteristics& oc)
    {
        const std::string adj = to_string(cfg.policy.method);
        if (oc.true_nulls > 0) {
            row(sweep, design_label, adj, "fwer", oc.fwer.value, oc.fwer.mc_se, oc.reps);
            for (const auto& [k, e] : oc.kfwer)
                if (k >= 2 && k <= oc.comparisons)
                    row(sweep, design_label, adj, "kfwer_" + std::to_string(k), e.value, e.mc_se,
                        oc.reps);
            row(sweep, design_label, adj, "pfer", oc.pfer.value, oc.pfer.mc_se, oc.reps);
        }
        for (std::size_t j = 0; j < oc.marginal_power.size(); ++j)
            if (const auto& p = oc.marginal_power[j])
                row(sweep, design_label, adj, "marginal_power_" + std::to_string(j + 1), p->value,
                    p->mc_se, oc.reps);
        if (oc.disjunctive_power)
            row(sweep, design_label, adj, "disjunctive_power", oc.disjunctive_power->value,
                oc.disjunctive_power->mc_se, oc.reps);
        if (oc.conjunctive_power)
            row(sweep, design_label, adj, "conjunctive_power", oc.conjunctive_power->value,
                oc.conjunctive_power->mc_se, oc.reps);

        const CorrelationMatrix corr = analytic_correlation(cfg.design);
        report_.detail["scenarios"].push_back(
            {{"sweep_value", sweep},
             {"design_label", design_label},
             {"adjustment", adj},
             {"alpha", cfg.policy.alpha},
             {"sidedness", to_string(cfg.policy.sidedness)},
             {"design", cfg.design},
             {"total_n", total_sample_size(cfg.design)},
             {"effects", cfg.effects},
             {"correlation", corr.to_rows()},
             {"threshold", rejection_threshold(cfg.policy, corr)},
             {"characteristics", to_json(oc)}});
    }

    void detail(const std::string& key, nlohmann::json value)
    {
        auto& arr = report_.detail[key];
        if (arr.is_null()) arr = nlohmann::json::array();
        arr.push_back(std::move(value));
    }

    Report take() { return std::move(report_); }

private:
    Settings s_;
    Report report_;
};

std::vector<double> null_effects(std::size_t m) { return std::vector<double>(m, 0.0); }

std::vector<double> single_effect(std::size_t m, std::size_t arm)
{
    auto e = null_effects(m);
    e.at(arm) = kEffect;
    return e;
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

void table3(ReportBuilder& b)
{
    for (const auto& p : kAllPolicies)
        b.scenario(3, "common", build_fixed_design(3, kArmN, ControlMode::common), null_effects(3), p);
    b.scenario(3, "individual", build_fixed_design(3, kArmN, ControlMode::individual),
               null_effects(3), kUnadjusted);
}

void table4(ReportBuilder& b)
{
    for (const auto& p : kAllPolicies)
        b.scenario(80, "common", build_staggered_design(kArmN, 80), null_effects(3), p);
    // Individual-control subtrials do not see the shift.
    b.scenario(80, "individual", build_fixed_design(3, kArmN, ControlMode::individual),
               null_effects(3), kUnadjusted);
}

void fig2_kfwer_sweep(ReportBuilder& b)
{
    for (std::size_t m = 2; m <= 10; ++m) {
        for (const auto& p : kAllPolicies)
            b.scenario(double(m), "common", build_fixed_design(m, kArmN, ControlMode::common),
                       null_effects(m), p);
        b.scenario(double(m), "individual", build_fixed_design(m, kArmN, ControlMode::individual),
                   null_effects(m), kUnadjusted);
    }
}

void sample_size_rows(ReportBuilder& b, double sweep, const std::string& label,
                      const DesignTemplate& tmpl, const AdjustmentPolicy& policy)
{
    const auto& s = b.settings();
    SearchOptions opt{SearchMethod::monte_carlo, std::max(s.reps, kDefaultReps), s.seed, s.mode,
                      s.workers};
    const auto res = required_per_arm_n({kPowerTarget, kEffect}, policy, tmpl, opt);
    const int total = total_sample_size(tmpl.build(res.n));
    const std::string adj = to_string(policy.method);
    b.row(sweep, label, adj, "required_n_per_arm", res.n, std::nullopt, opt.reps);
    b.row(sweep, label, adj, "required_n_analytic", res.analytic_n, std::nullopt, opt.reps);
    b.row(sweep, label, adj, "total_n", total, std::nullopt, opt.reps);
    b.row(sweep, label, adj, "marginal_power_at_n", res.power, res.mc_se, opt.reps);
    b.detail("sample_sizes", {{"sweep_value", sweep},
                              {"design_label", label},
                              {"adjustment", adj},
                              {"template", tmpl.name},
                              {"n_per_arm", res.n},
                              {"analytic_n", res.analytic_n},
                              {"total_n", total},
                              {"power", res.power},
                              {"mc_se", res.mc_se},
                              {"reps", opt.reps}});
}

void fig3_required_n(ReportBuilder& b)
{
    for (std::size_t m = 2; m <= 10; ++m) {
        for (const auto& p : kAllPolicies)
            sample_size_rows(b, double(m), "common", fixed_template(m, ControlMode::common), p);
        sample_size_rows(b, double(m), "individual", fixed_template(m, ControlMode::individual),
                         kUnadjusted);
    }
}

void fixed_total_scenario(ReportBuilder& b, std::size_t m, const std::string& label,
                          ControlMode mode, double ratio, const AdjustmentPolicy& policy,
                          const std::vector<double>& effects)
{
    const auto split = split_fixed_total(kFixedTotal, m, mode, ratio);
    const auto design = design_from_split(split, m, mode);
    b.scenario(double(m), label, design, effects, policy);
    const std::string adj = to_string(policy.method);
    const auto reps = b.settings().reps;
    b.row(double(m), label, adj, "treatment_n", split.treatment_n, std::nullopt, reps);
    b.row(double(m), label, adj, "control_n", split.control_n, std::nullopt, reps);
    b.row(double(m), label, adj, "marginal_power_1_exact",
          exact_marginal_power(design, 0, kEffect, policy), std::nullopt, reps);
}

void fig3_power_fixed_total(ReportBuilder& b)
{
    for (std::size_t m = 2; m <= 10; ++m) {
        const auto effects = single_effect(m, 0);
        for (const auto& p : kAllPolicies) {
            fixed_total_scenario(b, m, "common", ControlMode::common, 1.0, p, effects);
            fixed_total_scenario(b, m, "common_sqrtm", ControlMode::common, std::sqrt(double(m)),
                                 p, effects);
        }
        fixed_total_scenario(b, m, "individual", ControlMode::individual, 1.0, kUnadjusted, effects);
    }
}

void fig4_disj_conj(ReportBuilder& b)
{
    for (std::size_t m = 2; m <= 10; ++m) {
        const std::vector<double> effects(m, kEffect);
        for (const auto& p : kAllPolicies)
            b.scenario(double(m), "common",
                       design_from_split(split_fixed_total(kFixedTotal, m, ControlMode::common), m,
                                         ControlMode::common),
                       effects, p);
        b.scenario(double(m), "individual",
                   design_from_split(split_fixed_total(kFixedTotal, m, ControlMode::individual), m,
                                     ControlMode::individual),
                   effects, kUnadjusted);
    }
}

void fig5_flex_fwer(ReportBuilder& b)
{
    for (int shift : shift_grid(b.settings().sweep_step)) {
        for (const auto& p : kAllPolicies)
            b.scenario(shift, "common", build_staggered_design(kArmN, shift), null_effects(3), p);
        b.scenario(shift, "individual", build_fixed_design(3, kArmN, ControlMode::individual),
                   null_effects(3), kUnadjusted);
    }
}

void budget_rows(ReportBuilder& b, int shift, const BudgetAllocation& alloc)
{
    const auto reps = b.settings().reps;
    b.row(shift, "common", "none", "comparison_n", alloc.comparison_n, std::nullopt, reps);
    b.row(shift, "common", "none", "sponsor_funded", alloc.sponsor_funded(), std::nullopt, reps);
    b.row(shift, "common", "none", "total_n", total_sample_size(alloc.design), std::nullopt, reps);
    b.detail("budget_allocations", {{"shift", shift},
                                    {"budget", alloc.budget},
                                    {"comparison_n", alloc.comparison_n},
                                    {"sponsor_control_share", alloc.sponsor_control_share},
                                    {"sponsor_funded", alloc.sponsor_funded()},
                                    {"design", alloc.design}});
}

void fig6_flex_n_and_power(ReportBuilder& b)
{
    const auto late_effect = single_effect(3, 2);
    for (int shift : shift_grid(b.settings().sweep_step)) {
        // Required sample size for the late, effective arm.
        for (const auto& p : kAllPolicies)
            sample_size_rows(b, shift, "common", staggered_template(shift), p);
        auto ic = fixed_template(3, ControlMode::individual);
        ic.effective_arm = 2;
        sample_size_rows(b, shift, "individual", ic, kUnadjusted);

        // Marginal power under the late sponsor's budget.
        const auto alloc = build_budget_design(shift, kSponsorBudget);
        budget_rows(b, shift, alloc);
        for (const auto& p : kAllPolicies) b.scenario(shift, "common", alloc.design, late_effect, p);
        b.scenario(shift, "individual",
                   build_fixed_design(3, kSponsorBudget / 2, ControlMode::individual), late_effect,
                   kUnadjusted);
    }
}

void fig7_flex_disj_conj(ReportBuilder& b)
{
    const std::vector<double> effects(3, kEffect);
    for (int shift : shift_grid(b.settings().sweep_step)) {
        const auto alloc = build_budget_design(shift, kSponsorBudget);
        budget_rows(b, shift, alloc);
        for (const auto& p : kAllPolicies) b.scenario(shift, "common", alloc.design, effects, p);
        b.scenario(shift, "individual",
                   build_fixed_design(3, kSponsorBudget / 2, ControlMode::individual), effects,
                   kUnadjusted);
    }
}

struct PresetEntry {
    std::string name;
    std::string axis;
    std::function<void(ReportBuilder&)> run;
};

const std::vector<PresetEntry>& catalog()
{
    static const std::vector<PresetEntry> entries = {
        {"table3", "m", table3},
        {"table4", "shift", table4},
        {"fig2_kfwer_sweep", "m", fig2_kfwer_sweep},
        {"fig3_required_n", "m", fig3_required_n},
        {"fig3_power_fixed_total", "m", fig3_power_fixed_total},
        {"fig4_disj_conj", "m", fig4_disj_conj},
        {"fig5_flex_fwer", "shift", fig5_flex_fwer},
        {"fig6_flex_n_and_power", "shift", fig6_flex_n_and_power},
        {"fig7_flex_disj_conj", "shift", fig7_flex_disj_conj},
    };
    return entries;
}

std::vector<ResultRow> sorted_rows(const Report& report)
{
    auto rows = report.rows;
    std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return std::tie(a.preset, a.sweep_value, a.design, a.adjustment, a.metric) <
               std::tie(b.preset, b.sweep_value, b.design, b.adjustment, b.metric);
    });
    return rows;
}

}  // namespace

const std::vector<std::string>& preset_names()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& e : catalog()) out.push_back(e.name);
        return out;
    }();
    return names;
}

Report build_preset_report(const std::string& name, const RunOverrides& overrides)
{
    const auto& entries = catalog();
    const auto it = std::find_if(entries.begin(), entries.end(),
                                 [&](const PresetEntry& e) { return e.name == name; });
    if (it == entries.end()) throw invalid_argument("unknown preset '" + name + "'");
    ReportBuilder builder(it->name, it->axis, settings_from(overrides));
    it->run(builder);
    return builder.take();
}

Report build_config_report(const ScenarioConfig& config, unsigned workers)
{
    config.validate();
    Settings s{config.reps, config.seed, config.mode, kDefaultSweepStep, std::max(1u, workers)};
    ReportBuilder builder("config", "scenario", s);
    const auto oc = run_scenario(config, s.workers);
    builder.add_characteristics(0, to_string(config.design.control_mode()), config, oc);
    return builder.take();
}

std::string results_csv(const Report& report)
{
    std::ostringstream out;
    out << "preset,sweep_value,design,adjustment,metric,estimate,mc_se,reps,seed\n";
    for (const auto& r : sorted_rows(report)) {
        out << r.preset << ',' << format_number(r.sweep_value) << ',' << r.design << ','
            << r.adjustment << ',' << r.metric << ',' << format_number(r.estimate) << ','
            << (r.mc_se ? format_number(*r.mc_se) : std::string()) << ',' << r.reps << ','
            << r.seed << '\n';
    }
    return out.str();
}

std::string plotdata_csv(const Report& report)
{
    std::set<std::string> series;
    std::map<double, std::map<std::string, double>> table;
    for (const auto& r : report.rows) {
        const std::string key = r.design + ":" + r.adjustment + ":" + r.metric;
        series.insert(key);
        table[r.sweep_value][key] = r.estimate;
    }
    std::ostringstream out;
    out << report.axis;
    for (const auto& s : series) out << ',' << s;
    out << '\n';
    for (const auto& [x, cells] : table) {
        out << format_number(x);
        for (const auto& s : series) {
            out << ',';
            if (auto it = cells.find(s); it != cells.end()) out << format_number(it->second);
        }
        out << '\n';
    }
    return out.str();
}

void write_report(const Report& report, const std::filesystem::path& out_dir)
{
    std::filesystem::create_directories(out_dir / "plotdata");
    auto write = [](const std::filesystem::path& p, const std::string& text) {
        std::ofstream f(p, std::ios::binary);
        if (!f) throw platform_error("cannot write " + p.string());
        f << text;
        if (!f) throw platform_error("failed writing " + p.string());
    };
    write(out_dir / "results.csv", results_csv(report));
    write(out_dir / "results.json", report.detail.dump(2) + "\n");
    write(out_dir / "plotdata" / (report.preset + ".csv"), plotdata_csv(report));
}

Report run_preset(const std::string& name, const RunOverrides& overrides,
                  const std::filesystem::path& out_dir)
{
    Report report = build_preset_report(name, overrides);
    write_report(report, out_dir);
    return report;
}

nlohmann::json to_json(const OperatingCharacteristics& oc)
{
    auto est = [](const Estimate& e) { return nlohmann::json{{"estimate", e.value}, {"mc_se", e.mc_se}}; };
    auto opt = [&](const std::optional<Estimate>& e) { return e ? est(*e) : nlohmann::json(nullptr); };
    nlohmann::json kfwer = nlohmann::json::object();
    for (const auto& [k, e] : oc.kfwer) kfwer[std::to_string(k)] = est(e);
    nlohmann::json rates = nlohmann::json::array(), marginal = nlohmann::json::array();
    for (const auto& e : oc.rejection_rate) rates.push_back(est(e));
    for (const auto& e : oc.marginal_power) marginal.push_back(opt(e));
    return {{"reps", oc.reps},
            {"comparisons", oc.comparisons},
            {"true_nulls", oc.true_nulls},
            {"fwer", est(oc.fwer)},
            {"kfwer", kfwer},
            {"pfer", est(oc.pfer)},
            {"rejection_rate", rates},
            {"marginal_power", marginal},
            {"disjunctive_power", opt(oc.disjunctive_power)},
            {"conjunctive_power", opt(oc.conjunctive_power)}};
}

// ---------------------------------------------------------------------------
// Configuration files
// ---------------------------------------------------------------------------

namespace {

template <class T>
T field(const nlohmann::json& j, const std::string& key)
{
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw config_error(key, "has the wrong type");
    }
}

template <class Fn>
auto checked(const std::string& key, Fn&& fn)
{
    try {
        return fn();
    } catch (const config_error&) {
        throw;
    } catch (const platform_error& e) {
        throw config_error(key, e.what());
    }
}

}  // namespace

ScenarioConfig parse_config(const nlohmann::json& j)
{
    static const std::set<std::string> known = {"m",     "n",      "control",   "shift",
                                                "design", "effects", "alpha",    "sidedness",
                                                "adjustment", "reps", "seed",    "mode",
                                                "k_list"};
    if (!j.is_object()) throw config_error("", "configuration must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw config_error(key, "unknown key");

    std::optional<PlatformDesign> design;
    if (j.contains("design")) {
        for (const char* k : {"n", "control", "shift"})
            if (j.contains(k)) throw config_error(k, "cannot be combined with design");
        design = design_from_json(j.at("design"));
        if (j.contains("m") && field<std::size_t>(j, "m") != design->arms())
            throw config_error("m", "does not match the design's arm count");
    } else {
        if (!j.contains("n")) throw config_error("n", "required when no design is given");
        const int n = field<int>(j, "n");
        const ControlMode mode = j.contains("control")
                                     ? checked("control", [&] {
                                           return control_mode_from_string(field<std::string>(j, "control"));
                                       })
                                     : ControlMode::common;
        if (j.contains("shift")) {
            if (mode != ControlMode::common) throw config_error("shift", "needs control \"common\"");
            if (j.contains("m") && field<int>(j, "m") != 3)
                throw config_error("m", "staggered designs have exactly 3 arms");
            const int shift = field<int>(j, "shift");
            design = checked("shift", [&] { return build_staggered_design(n, shift); });
        } else {
            if (!j.contains("m")) throw config_error("m", "required when no design is given");
            const int m = field<int>(j, "m");
            if (m < 1) throw config_error("m", "must be at least 1");
            design = checked("n", [&] { return build_fixed_design(std::size_t(m), n, mode); });
        }
    }

    std::vector<double> effects(design->arms(), 0.0);
    if (j.contains("effects")) {
        effects = field<std::vector<double>>(j, "effects");
        if (effects.size() != design->arms())
            throw config_error("effects", "has " + std::to_string(effects.size()) +
                                              " entries, expected " + std::to_string(design->arms()));
    }

    AdjustmentPolicy policy;
    if (j.contains("alpha")) policy.alpha = field<double>(j, "alpha");
    if (j.contains("sidedness"))
        policy.sidedness = checked("sidedness", [&] { return sidedness_from_string(field<std::string>(j, "sidedness")); });
    if (j.contains("adjustment"))
        policy.method = checked("adjustment", [&] { return adjustment_from_string(field<std::string>(j, "adjustment")); });
    checked("alpha", [&] { policy.validate(); return 0; });

    ScenarioConfig cfg{*design, effects, policy};
    if (j.contains("reps")) {
        cfg.reps = field<std::int64_t>(j, "reps");
        if (cfg.reps < 1) throw config_error("reps", "must be at least 1");
    }
    if (j.contains("seed")) cfg.seed = field<std::uint64_t>(j, "seed");
    if (j.contains("mode"))
        cfg.mode = checked("mode", [&] { return simulation_mode_from_string(field<std::string>(j, "mode")); });
    if (j.contains("k_list")) {
        cfg.k_list = field<std::vector<int>>(j, "k_list");
        for (int k : cfg.k_list)
            if (k < 1) throw config_error("k_list", "entries must be >= 1");
    }
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw config_error("", "cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error("", std::string("parse error: ") + e.what());
    }
    return parse_config(j);
}

}  // namespace platform
