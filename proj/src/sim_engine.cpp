#include <platform/sim_engine.hpp>
#include <platform/correlation.hpp>
#include <platform/error.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

namespace platform {

std::string to_string(SimulationMode mode)
{
    return mode == SimulationMode::patient_level ? "patient" : "sufficient";
}

SimulationMode simulation_mode_from_string(const std::string& s)
{
    if (s == "patient") return SimulationMode::patient_level;
    if (s == "sufficient") return SimulationMode::sufficient_statistic;
    throw invalid_argument("unknown simulation mode '" + s + "' (expected patient|sufficient)");
}

void ScenarioConfig::validate() const
{
    if (effects.size() != design.arms())
        throw invalid_argument("effects has " + std::to_string(effects.size()) +
                               " entries but the design has " + std::to_string(design.arms()) +
                               " arms");
    if (reps < 1) throw invalid_argument("reps must be at least 1");
    policy.validate();
    for (int k : k_list)
        if (k < 1) throw invalid_argument("k_list entries must be >= 1");
}

namespace {

constexpr std::uint32_t kIndividualControlStream = 0x4000;

/* Stream ids follow the arm, not the row, so matching cells of different designs share draws. */
std::uint32_t stream_id(const PlatformDesign& d, std::size_t row)
{
    if (d.control_mode() == ControlMode::common) return static_cast<std::uint32_t>(row);
    const std::size_t m = d.arms();
    return row < m ? kIndividualControlStream + static_cast<std::uint32_t>(row)
                   : static_cast<std::uint32_t>(row - m + 1);
}

}  // namespace

ZStatSimulator::ZStatSimulator(const PlatformDesign& design, std::vector<double> effects,
                               SimulationMode mode)
    : rows_(design.rows()), periods_(design.periods()), mode_(mode)
{
    if (effects.size() != design.arms()) throw invalid_argument("effects length must equal m");
    if (design.rows() >= kIndividualControlStream || design.periods() > 0xFFFF)
        throw invalid_argument("design too large for the stream layout");

    std::vector<double> row_mean(design.rows(), 0.0);
    for (std::size_t j = 0; j < design.arms(); ++j) row_mean[design.treatment_row(j)] = effects[j];

    for (std::size_t r = 0; r < design.rows(); ++r)
        for (std::size_t t = 0; t < design.periods(); ++t)
            if (const int n = design.count(r, t); n > 0)
                cells_.push_back({r, stream_id(design, r), static_cast<std::uint32_t>(t), n,
                                  row_mean[r]});

    for (std::size_t j = 0; j < design.arms(); ++j) {
        Arm a{design.treatment_row(j), design.control_row(j), {}, 0.0, 0.0, 0.0};
        for (std::size_t t = 0; t < design.periods(); ++t)
            if (design.active(j, t)) a.periods.push_back(t);
        a.n_treatment = design.treatment_total(j);
        a.n_control = concurrent_control_count(design, j);
        if (a.n_control <= 0)
            throw invalid_argument("arm " + std::to_string(j + 1) + " has no concurrent controls");
        a.se = std::sqrt(1.0 / a.n_treatment + 1.0 / a.n_control);
        arms_.push_back(std::move(a));
    }
}

void ZStatSimulator::simulate(const Philox4x32& gen, std::uint64_t replication,
                              std::vector<double>& z) const
{
    thread_local std::vector<double> sums;
    sums.assign(rows_ * periods_, 0.0);
    for (const auto& c : cells_) {
        NormalStream stream(gen, replication, c.stream, c.period);
        double s;
        if (mode_ == SimulationMode::sufficient_statistic) {
            s = c.n * c.mean + std::sqrt(double(c.n)) * stream.next();
        } else {
            s = 0.0;
            for (int i = 0; i < c.n; ++i) s += c.mean + stream.next();
        }
        sums[c.row * periods_ + c.period] = s;
    }

    z.resize(arms_.size());
    for (std::size_t j = 0; j < arms_.size(); ++j) {
        const auto& a = arms_[j];
        double treated = 0.0;
        for (std::size_t t = 0; t < periods_; ++t) treated += sums[a.treatment_row * periods_ + t];
        double control = 0.0;
        for (std::size_t t : a.periods) control += sums[a.control_row * periods_ + t];
        z[j] = (treated / a.n_treatment - control / a.n_control) / a.se;
    }
}

std::vector<double> simulate_zstats(const PlatformDesign& design,
                                    const std::vector<double>& effects, std::uint64_t seed,
                                    std::uint64_t replication, SimulationMode mode)
{
    std::vector<double> z;
    ZStatSimulator(design, effects, mode).simulate(Philox4x32(seed), replication, z);
    return z;
}

ReplicationResult run_replication(const ScenarioConfig& config, std::uint64_t replication)
{
    config.validate();
    ReplicationResult out;
    out.z = simulate_zstats(config.design, config.effects, config.seed, replication, config.mode);
    out.rejections = decide_rejections(out.z, config.policy, analytic_correlation(config.design));
    return out;
}

OperatingCharacteristics run_scenario(const ScenarioConfig& config, unsigned workers)
{
    config.validate();
    const CorrelationMatrix corr = analytic_correlation(config.design);
    const double threshold = rejection_threshold(config.policy, corr);
    const ZStatSimulator sim(config.design, config.effects, config.mode);
    const Philox4x32 gen(config.seed);

    std::vector<bool> null_false(config.effects.size());
    for (std::size_t j = 0; j < null_false.size(); ++j) null_false[j] = config.effects[j] != 0.0;

    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(
                                                           std::min<std::int64_t>(config.reps, 1024))));
    std::vector<TallyAccumulator> partial(workers, TallyAccumulator(null_false));
    std::vector<std::exception_ptr> errors(workers);

    auto run_chunk = [&](unsigned w) {
        try {
            const std::int64_t begin = config.reps * w / workers;
            const std::int64_t end = config.reps * (w + 1) / workers;
            std::vector<double> z;
            std::vector<bool> rejected(null_false.size());
            for (std::int64_t r = begin; r < end; ++r) {
                sim.simulate(gen, static_cast<std::uint64_t>(r), z);
                for (std::size_t j = 0; j < z.size(); ++j)
                    rejected[j] = exceeds(z[j], threshold, config.policy.sidedness);
                partial[w].add(rejected);
            }
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };

    if (workers == 1) {
        run_chunk(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run_chunk, w);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    TallyAccumulator total(null_false);
    for (const auto& p : partial) total.merge(p);
    return total.finalize(config.k_list);
}

}  // namespace platform
