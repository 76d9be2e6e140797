#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <platform/distributions.hpp>
#include <platform/error.hpp>

#include <cmath>
#include <random>

using namespace platform;

namespace {

// Maclaurin series of Phi(x) - 1/2 = phi(x) * sum x^(2k+1) / (2k+1)!!.
long double series_cdf(long double x)
{
    const long double pdf = std::exp(-x * x / 2) / std::sqrt(2 * 3.14159265358979323846264338L);
    long double term = x, sum = x;
    for (int k = 1; k < 400; ++k) {
        term *= x * x / (2 * k + 1);
        sum += term;
        if (std::fabs(term) < 1e-30L * std::fabs(sum)) break;
    }
    return 0.5L + pdf * sum;
}

// Lower tail by the asymptotic expansion, valid for large |x|.
long double asymptotic_lower_tail(long double x)
{
    const long double a = -x;
    const long double pdf = std::exp(-a * a / 2) / std::sqrt(2 * 3.14159265358979323846264338L);
    long double term = 1, sum = 1;
    for (int k = 1; k < 8; ++k) {
        term *= -(2 * k - 1) / (a * a);
        sum += term;
    }
    return pdf / a * sum;
}

double oracle_quantile(double p)
{
    long double lo = -10, hi = 10;
    for (int i = 0; i < 200; ++i) {
        const long double mid = (lo + hi) / 2;
        (series_cdf(mid) < p ? lo : hi) = mid;
    }
    return double((lo + hi) / 2);
}

// Fraction of equicorrelated normal vectors whose largest |z| exceeds c.
double mc_exceedance(double c, std::size_t dim, double rho, std::int64_t draws, std::uint64_t seed)
{
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> normal;
    const double a = std::sqrt(rho), b = std::sqrt(1 - rho);
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < draws; ++i) {
        const double shared = a * normal(eng);
        bool hit = false;
        for (std::size_t j = 0; j < dim; ++j) hit |= std::abs(shared + b * normal(eng)) > c;
        hits += hit;
    }
    return double(hits) / double(draws);
}

MvnSpec equi(std::size_t dim, double rho) { return MvnSpec(CorrelationMatrix::equicorrelated(dim, rho)); }

}  // namespace

TEST_CASE("normal cdf against the series and tail oracles")
{
    CHECK(normal_cdf(0.0) == 0.5);
    for (double x : {-5.0, -2.5, -1.0, -0.3, 0.7, 1.959964, 3.1, 6.0})
        CHECK(normal_cdf(x) == doctest::Approx(double(series_cdf(x))).epsilon(1e-14));
    CHECK(normal_cdf(1.959964) == doctest::Approx(0.97500000090355759801).epsilon(1e-15));
    CHECK(normal_cdf(-8.0) == doctest::Approx(double(asymptotic_lower_tail(-8.0))).epsilon(1e-10));
    CHECK(normal_cdf(-8.0) == doctest::Approx(6.2209605742717841235e-16).epsilon(1e-13));
    CHECK(normal_cdf(-40.0) >= 0.0);
}

TEST_CASE("normal quantile inverts the cdf")
{
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(normal_quantile(0.975) == doctest::Approx(oracle_quantile(0.975)).epsilon(1e-13));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.9599639845400542355).epsilon(1e-15));
    CHECK(normal_quantile(0.9) == doctest::Approx(1.281551565544600467).epsilon(1e-15));
    for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.77, 0.999999})
        CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
    CHECK_THROWS_AS(normal_quantile(0.0), invalid_argument);
    CHECK_THROWS_AS(normal_quantile(1.0), invalid_argument);
    CHECK_THROWS_AS(normal_quantile(std::nan("")), invalid_argument);
}

TEST_CASE("structure detection")
{
    CHECK(equi(3, 0.5).structure() == MvnSpec::Structure::equicorrelated);
    CHECK(MvnSpec(CorrelationMatrix::identity(4)).structure() == MvnSpec::Structure::equicorrelated);

    const double l1 = std::sqrt(0.5), l3 = 0.23333333333333333 / l1;
    Eigen::MatrixXd pf(3, 3);
    pf << 1, 0.5, l1 * l3, 0.5, 1, l1 * l3, l1 * l3, l1 * l3, 1;
    const MvnSpec product{CorrelationMatrix(pf)};
    CHECK(product.structure() == MvnSpec::Structure::product_form);
    CHECK(product.loadings()[2] == doctest::Approx(l3).epsilon(1e-12));

    Eigen::MatrixXd g(3, 3);
    g << 1, 0.6, 0.1, 0.6, 1, 0.5, 0.1, 0.5, 1;
    CHECK(MvnSpec(CorrelationMatrix(g)).structure() == MvnSpec::Structure::general);
    CHECK(equi(3, 0.5).as_general().structure() == MvnSpec::Structure::general);
}

TEST_CASE("band probability: closed forms")
{
    const double c = 1.959964;
    CHECK(max_abs_mvn_cdf(c, MvnSpec(CorrelationMatrix::identity(3))).value ==
          doctest::Approx(std::pow(1 - 2 * normal_cdf(-c), 3)).epsilon(1e-10));
    CHECK(max_abs_mvn_cdf(c, equi(3, 0.5)).value == doctest::Approx(0.874557148990065).epsilon(1e-10));
    CHECK(max_abs_mvn_cdf(0.0, equi(3, 0.5)).value == 0.0);
    CHECK(band_probability(c, equi(1, 0.0), Sidedness::one_sided).value ==
          doctest::Approx(normal_cdf(c)).epsilon(1e-12));

    // Shift-80 staggered loadings: sqrt(1/2), sqrt(1/2), 0.2333/sqrt(1/2).
    const double l1 = std::sqrt(0.5), l3 = (7.0 / 30.0) / l1;
    Eigen::MatrixXd pf(3, 3);
    pf << 1, 0.5, l1 * l3, 0.5, 1, l1 * l3, l1 * l3, l1 * l3, 1;
    CHECK(max_abs_mvn_cdf(2.3, MvnSpec(CorrelationMatrix(pf))).value ==
          doctest::Approx(0.940180067298864).epsilon(1e-6));
}

TEST_CASE("band probability is non-decreasing in c")
{
    for (const auto& spec : {equi(3, 0.5), equi(6, 0.2), MvnSpec(CorrelationMatrix::identity(2))}) {
        double previous = 0.0;
        for (double c = 0.0; c <= 5.0; c += 0.05) {
            const double v = max_abs_mvn_cdf(c, spec).value;
            CHECK(v >= previous - 1e-12);
            previous = v;
        }
    }
}

TEST_CASE("lattice path agrees with quadrature")
{
    for (auto [dim, rho] : {std::pair{3, 0.5}, std::pair{5, 0.3}, std::pair{8, 0.7}})
        for (double c : {1.8, 2.35, 2.8})
            for (auto side : {Sidedness::two_sided, Sidedness::one_sided}) {
                const auto spec = equi(std::size_t(dim), rho);
                const auto quad = band_probability(c, spec, side);
                const auto qmc = band_probability(c, spec.as_general(), side);
                CHECK(std::abs(quad.value - qmc.value) <= 4 * (quad.error + qmc.error) + 1e-12);
            }
}

TEST_CASE("Dunnett critical values: frozen high-precision references")
{
    const auto two = Sidedness::two_sided, one = Sidedness::one_sided;
    CHECK(dunnett_critical_value(equi(3, 0.5), 0.05, two) == doctest::Approx(2.34897059033927).epsilon(1e-9));
    CHECK(dunnett_critical_value(equi(3, 0.5), 0.05, one) == doctest::Approx(2.06208393292321).epsilon(1e-9));
    CHECK(dunnett_critical_value(equi(2, 0.5), 0.05, two) == doctest::Approx(2.21212774657862).epsilon(1e-9));
    CHECK(dunnett_critical_value(equi(2, 0.5), 0.05, one) == doctest::Approx(1.91633194468762).epsilon(1e-9));
    CHECK(dunnett_critical_value(equi(10, 0.5), 0.05, two) == doctest::Approx(2.7162885392557).epsilon(1e-9));
    CHECK(dunnett_critical_value(equi(10, 0.5), 0.05, one) == doctest::Approx(2.44838961683984).epsilon(1e-9));
    CHECK(dunnett_critical_value(equi(3, 0.9), 0.05, two) == doctest::Approx(2.18534738704432).epsilon(1e-9));
    CHECK(dunnett_critical_value(equi(3, 0.9), 0.05, one) == doctest::Approx(1.87666350296216).epsilon(1e-9));

    const double l1 = std::sqrt(0.5), l3 = (7.0 / 30.0) / l1;
    Eigen::MatrixXd pf(3, 3);
    pf << 1, 0.5, l1 * l3, 0.5, 1, l1 * l3, l1 * l3, l1 * l3, 1;
    CHECK(dunnett_critical_value(MvnSpec(CorrelationMatrix(pf)), 0.05, two) ==
          doctest::Approx(2.36950656054059).epsilon(1e-8));
}

TEST_CASE("Dunnett critical value: Monte Carlo oracle")
{
    const double c = dunnett_critical_value(equi(3, 0.5), 0.05);
    CHECK(c == doctest::Approx(2.35).epsilon(0.005));
    const std::int64_t draws = 10'000'000;
    const double rate = mc_exceedance(c, 3, 0.5, draws, 20240101);
    const double se = std::sqrt(0.05 * 0.95 / double(draws));
    CHECK(std::abs(rate - 0.05) <= 3 * se);
}

TEST_CASE("Dunnett critical value: simple cases")
{
    CHECK(dunnett_critical_value(equi(1, 0.0), 0.05) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    const double sidak = normal_quantile(0.5 * (1 + std::pow(0.95, 1.0 / 3)));
    CHECK(dunnett_critical_value(MvnSpec(CorrelationMatrix::identity(3)), 0.05) ==
          doctest::Approx(sidak).epsilon(1e-10));
    CHECK_THROWS_AS(dunnett_critical_value(equi(3, 0.5), 0.0), invalid_argument);
    CHECK_THROWS_AS(dunnett_critical_value(equi(3, 0.5), 1.0), invalid_argument);
}

TEST_CASE("Dunnett critical value lies between unadjusted and Bonferroni")
{
    for (std::size_t m = 2; m <= 10; ++m) {
        const double bonf = normal_quantile(1 - 0.05 / (2.0 * double(m)));
        const double unadj = normal_quantile(0.975);
        for (double rho : {0.0, 0.5}) {
            const double c = dunnett_critical_value(equi(m, rho), 0.05);
            CHECK(c <= bonf);
            CHECK(c >= unadj);
        }
    }
}

TEST_CASE("Dunnett critical value does not increase with the correlation")
{
    double previous = 1e9;
    for (double rho = 0.0; rho <= 0.9 + 1e-12; rho += 0.1) {
        const double c = dunnett_critical_value(equi(4, rho), 0.05);
        CHECK(c <= previous + 1e-10);
        previous = c;
    }
}

TEST_CASE("general path solves the critical value on the lattice")
{
    Eigen::MatrixXd g(3, 3);
    g << 1, 0.6, 0.1, 0.6, 1, 0.5, 0.1, 0.5, 1;
    const MvnSpec spec{CorrelationMatrix(g)};
    const double c = dunnett_critical_value(spec, 0.05);
    const auto p = max_abs_mvn_cdf(c, spec);
    CHECK(std::abs(p.value - 0.95) <= 4 * p.error + 1e-6);
    CHECK(dunnett_critical_value(spec, 0.05) == c);  // reproducible
}

TEST_CASE("Hermite rule integrates polynomials exactly")
{
    const auto& rule = hermite_rule(64);
    // Weights are for the standard normal density.
    double m0 = 0, m2 = 0, m4 = 0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = rule.nodes[i], w = rule.weights[i];
        m0 += w;
        m2 += w * x * x;
        m4 += w * x * x * x * x;
    }
    CHECK(m0 == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(m2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m4 == doctest::Approx(3.0).epsilon(1e-12));
}
