#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <platform/error.hpp>
#include <platform/metrics.hpp>

#include <cmath>
#include <random>

using namespace platform;

TEST_CASE("tally counts")
{
    const std::vector<bool> null3(3, false);
    auto t = tally_outcomes({true, false, true}, null3);
    CHECK(t.false_rejections == 2);
    CHECK(t.true_rejections == 0);
    CHECK(t.rejections == 2);

    t = tally_outcomes({true, true, false}, {true, false, false});
    CHECK(t.false_rejections == 1);
    CHECK(t.true_rejections == 1);
    CHECK(t.true_nulls == 2);

    t = tally_outcomes({false, false, false}, {true, true, false});
    CHECK(t.false_rejections == 0);
    CHECK(t.true_rejections == 0);
    CHECK(t.rejections == 0);
    CHECK_THROWS_AS(tally_outcomes({true}, null3), invalid_argument);
}

TEST_CASE("all-zero tallies")
{
    std::vector<RejectionTally> tallies(50, tally_outcomes({false, false, false}, std::vector<bool>(3, false)));
    const auto oc = aggregate_characteristics(tallies, {1, 2, 3});
    CHECK(oc.fwer.value == 0.0);
    CHECK(oc.fwer.mc_se == 0.0);
    CHECK(oc.pfer.value == 0.0);
    CHECK(oc.pfer.mc_se == 0.0);
    CHECK_FALSE(oc.disjunctive_power.has_value());
    CHECK_FALSE(oc.conjunctive_power.has_value());
    for (const auto& p : oc.marginal_power) CHECK_FALSE(p.has_value());
}

TEST_CASE("aggregation on a hand-made sample")
{
    const std::vector<bool> truth{true, false, false};
    std::vector<RejectionTally> t = {
        tally_outcomes({true, true, true}, truth),    // V=2, S=1
        tally_outcomes({true, false, false}, truth),  // V=0, S=1
        tally_outcomes({false, true, false}, truth),  // V=1, S=0
        tally_outcomes({false, false, false}, truth), // V=0, S=0
    };
    const auto oc = aggregate_characteristics(t, {1, 2});
    CHECK(oc.reps == 4);
    CHECK(oc.fwer.value == doctest::Approx(0.5));
    CHECK(oc.fwer.mc_se == doctest::Approx(std::sqrt(0.25 / 4)));
    CHECK(oc.kfwer.at(2).value == doctest::Approx(0.25));
    CHECK(oc.pfer.value == doctest::Approx(0.75));
    // Sample standard deviation of V = {2, 0, 1, 0}.
    CHECK(oc.pfer.mc_se == doctest::Approx(std::sqrt((1.5625 + 0.5625 + 0.0625 + 0.5625) / 3) / 2));
    CHECK(oc.marginal_power[0]->value == doctest::Approx(0.5));
    CHECK_FALSE(oc.marginal_power[1].has_value());
    CHECK(oc.disjunctive_power->value == doctest::Approx(0.5));
    CHECK(oc.conjunctive_power->value == doctest::Approx(0.5));
}

TEST_CASE("random tallies satisfy the structural identities")
{
    std::mt19937_64 eng(11);
    std::bernoulli_distribution coin(0.3);
    for (int m = 1; m <= 6; ++m) {
        std::vector<bool> truth(std::size_t(m), false);
        for (int j = 0; j < m; j += 2) truth[std::size_t(j)] = true;
        std::vector<RejectionTally> tallies;
        for (int r = 0; r < 2000; ++r) {
            std::vector<bool> rej(static_cast<std::size_t>(m));
            for (auto&& b : rej) b = coin(eng);
            const auto t = tally_outcomes(rej, truth);
            CHECK(t.false_rejections + t.true_rejections == t.rejections);
            CHECK(t.false_rejections <= t.true_nulls);
            CHECK(t.true_rejections <= m - t.true_nulls);
            tallies.push_back(t);
        }
        std::vector<int> ks;
        for (int k = 1; k <= m; ++k) ks.push_back(k);
        const auto oc = aggregate_characteristics(tallies, ks);
        CHECK(oc.fwer.value == oc.kfwer.at(1).value);
        double sum = 0, rate_sum = 0;
        for (int k = 1; k <= m; ++k) {
            sum += oc.kfwer.at(k).value;
            if (k < m) CHECK(oc.kfwer.at(k).value >= oc.kfwer.at(k + 1).value);
        }
        CHECK(oc.pfer.value == doctest::Approx(sum).epsilon(1e-12));
        for (std::size_t j = 0; j < truth.size(); ++j)
            if (!truth[j]) rate_sum += oc.rejection_rate[j].value;
        CHECK(oc.pfer.value == doctest::Approx(rate_sum).epsilon(1e-12));
        for (const auto& p : oc.marginal_power)
            if (p) {
                CHECK(oc.conjunctive_power->value <= p->value);
                CHECK(p->value <= oc.disjunctive_power->value);
            }
    }
}

TEST_CASE("merging accumulators equals adding sequentially")
{
    const std::vector<bool> truth{false, true, false};
    TallyAccumulator whole(truth), a(truth), b(truth);
    std::mt19937_64 eng(5);
    std::bernoulli_distribution coin(0.4);
    for (int r = 0; r < 1000; ++r) {
        std::vector<bool> rej{coin(eng), coin(eng), coin(eng)};
        whole.add(rej);
        (r < 400 ? a : b).add(rej);
    }
    a.merge(b);
    const auto x = whole.finalize({1, 2, 3}), y = a.finalize({1, 2, 3});
    CHECK(x.fwer.value == y.fwer.value);
    CHECK(x.pfer.value == y.pfer.value);
    CHECK(x.pfer.mc_se == y.pfer.mc_se);
    CHECK(x.kfwer.at(2).value == y.kfwer.at(2).value);
    CHECK(x.marginal_power[1]->value == y.marginal_power[1]->value);
}
