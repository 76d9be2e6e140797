#pragma once
#include <cstddef>
#include <cstdint>
#include <vector>
#include <platform/correlation.hpp>

namespace platform {

enum class Sidedness { one_sided, two_sided };

double normal_cdf(double x);
double normal_quantile(double p);

/*
 * Joint law of the comparison statistics with its detected structure:
 *  - equicorrelated: every off-diagonal equals rho;
 *  - product form:   rho(i, j) = lambda_i * lambda_j;
 *  - general:        anything else.
 * The first two reduce band probabilities to one-dimensional integrals.
 */
class MvnSpec {
public:
    enum class Structure { equicorrelated, product_form, general };

    explicit MvnSpec(CorrelationMatrix corr);

    std::size_t dim() const noexcept { return corr_.dim(); }
    const CorrelationMatrix& correlation() const noexcept { return corr_; }
    Structure structure() const noexcept { return structure_; }
    /* lambda_i for the one-factor representation; empty for general specs. */
    const std::vector<double>& loadings() const noexcept { return loadings_; }

    /* Same matrix, but the factor structure is ignored. */
    MvnSpec as_general() const;

private:
    CorrelationMatrix corr_;
    Structure structure_;
    std::vector<double> loadings_;
};

struct BandProbability {
    double value;
    /* Numerical error estimate: quadrature change or QMC standard error. */
    double error;
};

/*
 * P(max_j |Z_j| <= c) for two-sided, P(max_j Z_j <= c) for one-sided.
 * Factor structures use Gauss-Hermite quadrature with node doubling; general
 * matrices use randomized lattice QMC over Genz's separation of variables.
 */
BandProbability band_probability(double c, const MvnSpec& spec,
                                 Sidedness sidedness = Sidedness::two_sided);

inline BandProbability max_abs_mvn_cdf(double c, const MvnSpec& spec)
{
    return band_probability(c, spec, Sidedness::two_sided);
}

/* Smallest c whose band probability reaches 1 - alpha. */
double dunnett_critical_value(const MvnSpec& spec, double alpha,
                              Sidedness sidedness = Sidedness::two_sided);

/* Probabilists' Gauss-Hermite rule: sum w_i f(x_i) ~ E f(Z), Z ~ N(0,1). */
struct HermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const HermiteRule& hermite_rule(std::size_t n);

}  // namespace platform
