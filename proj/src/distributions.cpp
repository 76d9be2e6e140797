#include <platform/distributions.hpp>
#include <platform/error.hpp>
#include <platform/rng.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <boost/math/special_functions/erf.hpp>
#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace platform {

double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0)) throw invalid_argument("normal_quantile needs p in (0, 1)");
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

// ---------------------------------------------------------------------------
// Structure detection
// ---------------------------------------------------------------------------

namespace {

constexpr double kStructureTol = 1e-12;
constexpr double kMaxLoading = 1.0 - 1e-9;

bool fit_equicorrelated(const CorrelationMatrix& c, double& rho)
{
    const std::size_t d = c.dim();
    if (d == 1) {
        rho = 0.0;
        return true;
    }
    rho = c(0, 1);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j)
            if (std::abs(c(i, j) - rho) > kStructureTol) return false;
    return true;
}

bool fit_product_form(const CorrelationMatrix& c, std::vector<double>& lambda)
{
    const std::size_t d = c.dim();
    lambda.assign(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        // Best-conditioned pair (j, k) not involving i.
        double best = 0.0;
        std::size_t bj = d, bk = d;
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t k = j + 1; k < d; ++k)
                if (j != i && k != i && c(j, k) > best) {
                    best = c(j, k);
                    bj = j;
                    bk = k;
                }
        if (best > kStructureTol) {
            lambda[i] = std::sqrt(std::max(0.0, c(i, bj) * c(i, bk) / best));
            continue;
        }
        // No usable pair: i may be linked to at most one other variable.
        std::size_t linked = 0;
        double value = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            if (j != i && c(i, j) > kStructureTol) {
                ++linked;
                value = c(i, j);
            }
        if (linked > 1) return false;
        lambda[i] = std::sqrt(value);
    }
    for (std::size_t i = 0; i < d; ++i) {
        if (lambda[i] > kMaxLoading) return false;
        for (std::size_t j = i + 1; j < d; ++j)
            if (std::abs(lambda[i] * lambda[j] - c(i, j)) > kStructureTol) return false;
    }
    return true;
}

}  // namespace

MvnSpec::MvnSpec(CorrelationMatrix corr) : corr_(std::move(corr)), structure_(Structure::general)
{
    double rho = 0.0;
    if (fit_equicorrelated(corr_, rho) && std::sqrt(rho) <= kMaxLoading) {
        structure_ = Structure::equicorrelated;
        loadings_.assign(dim(), std::sqrt(rho));
    } else if (fit_product_form(corr_, loadings_)) {
        structure_ = Structure::product_form;
    } else {
        loadings_.clear();
    }
}

MvnSpec MvnSpec::as_general() const
{
    MvnSpec out = *this;
    out.structure_ = Structure::general;
    out.loadings_.clear();
    return out;
}

// ---------------------------------------------------------------------------
// Gauss-Hermite rules (Golub-Welsch nodes, orthonormal-recurrence weights)
// ---------------------------------------------------------------------------

namespace {

HermiteRule make_hermite_rule(std::size_t n)
{
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    Eigen::VectorXd sub(static_cast<Eigen::Index>(n - 1));
    for (std::size_t k = 1; k < n; ++k) sub(static_cast<Eigen::Index>(k - 1)) = std::sqrt(double(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);

    HermiteRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = solver.eigenvalues()(static_cast<Eigen::Index>(i));
        // w_i = 1 / sum_k p_k(x_i)^2 with p_k the orthonormal Hermite polynomials.
        double prev = 0.0, cur = 1.0, sum = 1.0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            const double next = (x * cur - std::sqrt(double(k)) * prev) / std::sqrt(double(k + 1));
            prev = cur;
            cur = next;
            sum += cur * cur;
        }
        rule.nodes[i] = x;
        rule.weights[i] = std::isfinite(sum) ? 1.0 / sum : 0.0;
    }
    return rule;
}

constexpr std::size_t kMinNodes = 64;
constexpr std::size_t kMaxNodes = 512;
constexpr double kQuadratureTol = 1e-9;

template <class Integrand>
BandProbability gauss_hermite_doubling(Integrand&& f)
{
    auto integrate = [&](std::size_t n) {
        const auto& rule = hermite_rule(n);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (rule.weights[i] > 0.0) acc += rule.weights[i] * f(rule.nodes[i]);
        return acc;
    };
    double prev = integrate(kMinNodes);
    double diff = 1.0;
    for (std::size_t n = 2 * kMinNodes; n <= kMaxNodes; n *= 2) {
        const double cur = integrate(n);
        diff = std::abs(cur - prev);
        prev = cur;
        if (diff < kQuadratureTol) break;
    }
    return {std::clamp(prev, 0.0, 1.0), diff};
}

BandProbability factor_band(double c, const std::vector<double>& lambda, Sidedness sidedness)
{
    std::vector<double> scale(lambda.size());
    for (std::size_t j = 0; j < lambda.size(); ++j) scale[j] = std::sqrt(1.0 - lambda[j] * lambda[j]);
    return gauss_hermite_doubling([&](double w) {
        double p = 1.0;
        for (std::size_t j = 0; j < lambda.size(); ++j) {
            const double shift = lambda[j] * w;
            const double upper = normal_cdf((c - shift) / scale[j]);
            p *= sidedness == Sidedness::two_sided
                     ? upper - normal_cdf((-c - shift) / scale[j])
                     : upper;
        }
        return p;
    });
}

// ---------------------------------------------------------------------------
// General matrices: Genz separation of variables on a randomized lattice
// ---------------------------------------------------------------------------

constexpr std::uint64_t kLatticeSeed = 0x5EEDCAFEF00DULL;
constexpr int kShifts = 12;
constexpr std::size_t kMinPoints = 1024;
constexpr std::size_t kMaxPoints = 1 << 17;
constexpr double kQmcTarget = 2.5e-5;

/* Lower-triangular factor of a symmetric permutation of the matrix. */
Eigen::MatrixXd pivoted_square_root(const Eigen::MatrixXd& a)
{
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
        Eigen::MatrixXd l = llt.matrixL();
        if ((l.diagonal().array() > 1e-8).all()) return l;
    }
    // Near-singular: LDLT with symmetric pivoting. The band is the same for
    // every coordinate, so reordering the variables does not change it.
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    Eigen::MatrixXd l = ldlt.matrixL();
    Eigen::VectorXd d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
    return l * d.asDiagonal();
}

double genz_integrand(const Eigen::MatrixXd& chol, const double* w, double lo, double hi,
                      std::vector<double>& y)
{
    const Eigen::Index d = chol.rows();
    double f = 1.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        double s = 0.0;
        for (Eigen::Index k = 0; k < i; ++k) s += chol(i, k) * y[static_cast<std::size_t>(k)];
        const double cii = chol(i, i);
        if (cii < 1e-10) {
            if (s < lo || s > hi) return 0.0;
            y[static_cast<std::size_t>(i)] = 0.0;
            continue;
        }
        const double dl = std::isinf(lo) ? 0.0 : normal_cdf((lo - s) / cii);
        const double eh = normal_cdf((hi - s) / cii);
        const double width = eh - dl;
        if (width <= 0.0) return 0.0;
        f *= width;
        if (i + 1 < d) {
            const double u = std::clamp(dl + w[i] * width, 1e-300, 1.0 - 1e-16);
            y[static_cast<std::size_t>(i)] = normal_quantile(u);
        }
    }
    return f;
}

BandProbability lattice_band(double c, const CorrelationMatrix& corr, Sidedness sidedness)
{
    static constexpr std::array<double, 16> kPrimes = {2,  3,  5,  7,  11, 13, 17, 19,
                                                       23, 29, 31, 37, 41, 43, 47, 53};
    const Eigen::MatrixXd chol = pivoted_square_root(corr.matrix());
    const std::size_t d = corr.dim();
    if (d - 1 > kPrimes.size()) throw invalid_argument("general MVN path supports dim <= 17");

    const double lo = sidedness == Sidedness::two_sided ? -c : -std::numeric_limits<double>::infinity();
    const double hi = c;

    std::vector<double> gen(d, 0.0);
    for (std::size_t k = 0; k + 1 < d; ++k) gen[k] = std::fmod(std::sqrt(kPrimes[k]), 1.0);

    Philox4x32 philox(kLatticeSeed);
    std::vector<std::vector<double>> shifts(kShifts, std::vector<double>(d, 0.0));
    for (int s = 0; s < kShifts; ++s)
        for (std::size_t k = 0; k < d; k += 2) {
            const auto block = philox({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(k), 0, 0});
            shifts[s][k] = to_open_unit(block[0], block[1]);
            if (k + 1 < d) shifts[s][k + 1] = to_open_unit(block[2], block[3]);
        }

    std::vector<double> y(d), w(d);
    BandProbability result{0.0, 1.0};
    for (std::size_t n = kMinPoints; n <= kMaxPoints; n *= 2) {
        double mean = 0.0, m2 = 0.0;
        for (int s = 0; s < kShifts; ++s) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t k = 0; k + 1 < d; ++k) {
                    const double x = std::fmod(double(i + 1) * gen[k] + shifts[s][k], 1.0);
                    w[k] = std::abs(2.0 * x - 1.0);  // tent periodization
                }
                acc += genz_integrand(chol, w.data(), lo, hi, y);
            }
            const double est = acc / double(n);
            const double delta = est - mean;
            mean += delta / (s + 1);
            m2 += delta * (est - mean);
        }
        result = {std::clamp(mean, 0.0, 1.0), std::sqrt(m2 / (kShifts - 1) / kShifts)};
        if (result.error <= kQmcTarget) break;
    }
    return result;
}

}  // namespace

const HermiteRule& hermite_rule(std::size_t n)
{
    static std::mutex mtx;
    static std::map<std::size_t, std::unique_ptr<HermiteRule>> cache;
    if (n == 0 || n > 2 * kMaxNodes) throw invalid_argument("unsupported Gauss-Hermite order");
    std::lock_guard lock(mtx);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<HermiteRule>(make_hermite_rule(n));
    return *slot;
}

BandProbability band_probability(double c, const MvnSpec& spec, Sidedness sidedness)
{
    if (!(c >= 0.0)) throw invalid_argument("band half-width must be non-negative");
    if (c == 0.0 && sidedness == Sidedness::two_sided) return {0.0, 0.0};
    if (spec.structure() == MvnSpec::Structure::general)
        return lattice_band(c, spec.correlation(), sidedness);
    return factor_band(c, spec.loadings(), sidedness);
}

double dunnett_critical_value(const MvnSpec& spec, double alpha, Sidedness sidedness)
{
    if (!(alpha > 0.0 && alpha < 1.0)) throw invalid_argument("alpha must lie in (0, 1)");
    const double m = double(spec.dim());
    const double tail = sidedness == Sidedness::two_sided ? alpha / 2.0 : alpha;
    const double target = 1.0 - alpha;
    if (spec.dim() == 1) return normal_quantile(1.0 - tail);

    // Unadjusted and Bonferroni thresholds bracket the root for any correlation.
    double lo = normal_quantile(1.0 - tail);
    double hi = normal_quantile(1.0 - tail / m);
    auto coverage = [&](double c) { return band_probability(c, spec, sidedness).value; };
    if (coverage(hi) < target - 1e-6 || coverage(lo) > target + 1e-6)
        throw convergence_error("Dunnett root is not bracketed");

    const bool general = spec.structure() == MvnSpec::Structure::general;
    const double tol = general ? 1e-7 : 1e-12;
    constexpr int kMaxIter = 200;
    for (int it = 0; it < kMaxIter && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        (coverage(mid) >= target ? hi : lo) = mid;
    }
    if (hi - lo > tol) throw convergence_error("Dunnett critical value did not converge");
    if (!general && std::abs(coverage(hi) - target) > 1e-6)
        throw convergence_error("Dunnett critical value residual above 1e-6");
    return hi;
}

}  // namespace platform
