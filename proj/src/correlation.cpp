#include <platform/correlation.hpp>
#include <platform/error.hpp>
#include <platform/rng.hpp>
#include <platform/sim_engine.hpp>

#include <cmath>
#include <Eigen/Eigenvalues>

namespace platform {

namespace {
constexpr double kSymTol = 1e-12;
constexpr double kPsdTol = -1e-10;
}  // namespace

CorrelationMatrix::CorrelationMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries))
{
    const auto d = entries_.rows();
    if (d == 0 || entries_.cols() != d) throw invalid_argument("correlation matrix must be square");
    for (Eigen::Index i = 0; i < d; ++i) {
        if (std::abs(entries_(i, i) - 1.0) > kSymTol)
            throw invalid_argument("correlation matrix needs a unit diagonal");
        entries_(i, i) = 1.0;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = entries_(i, j);
            if (!std::isfinite(v) || std::abs(v - entries_(j, i)) > kSymTol)
                throw invalid_argument("correlation matrix is not symmetric");
            if (v < -kSymTol || v > 1.0 + kSymTol)
                throw invalid_argument("correlation entries must lie in [0, 1]");
            entries_(j, i) = v;
        }
    }
    if (d > 1 && min_eigenvalue() < kPsdTol)
        throw invalid_argument("correlation matrix is not positive semidefinite");
}

CorrelationMatrix CorrelationMatrix::identity(std::size_t dim)
{
    return CorrelationMatrix(Eigen::MatrixXd::Identity(Eigen::Index(dim), Eigen::Index(dim)));
}

CorrelationMatrix CorrelationMatrix::equicorrelated(std::size_t dim, double rho)
{
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(Eigen::Index(dim), Eigen::Index(dim), rho);
    m.diagonal().setOnes();
    return CorrelationMatrix(std::move(m));
}

double CorrelationMatrix::min_eigenvalue() const
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(entries_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

CorrelationMatrix CorrelationMatrix::permuted(const std::vector<std::size_t>& perm) const
{
    if (perm.size() != dim()) throw invalid_argument("permutation size mismatch");
    Eigen::MatrixXd out(entries_.rows(), entries_.cols());
    for (std::size_t i = 0; i < dim(); ++i)
        for (std::size_t j = 0; j < dim(); ++j)
            out(Eigen::Index(i), Eigen::Index(j)) = entries_(Eigen::Index(perm.at(i)), Eigen::Index(perm.at(j)));
    return CorrelationMatrix(std::move(out));
}

std::vector<std::vector<double>> CorrelationMatrix::to_rows() const
{
    std::vector<std::vector<double>> rows(dim(), std::vector<double>(dim()));
    for (std::size_t i = 0; i < dim(); ++i)
        for (std::size_t j = 0; j < dim(); ++j) rows[i][j] = (*this)(i, j);
    return rows;
}

CorrelationMatrix analytic_correlation(const PlatformDesign& design)
{
    const std::size_t m = design.arms();
    if (design.control_mode() == ControlMode::individual) return CorrelationMatrix::identity(m);

    std::vector<double> n0(m), se(m);
    for (std::size_t j = 0; j < m; ++j) {
        const int c = concurrent_control_count(design, j);
        if (c <= 0)
            throw invalid_argument("arm " + std::to_string(j + 1) + " has no concurrent controls");
        n0[j] = c;
        se[j] = std::sqrt(1.0 / design.treatment_total(j) + 1.0 / n0[j]);
    }
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(Eigen::Index(m), Eigen::Index(m));
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b) {
            const double overlap = shared_control_count(design, a, b);
            const double rho = overlap / (n0[a] * n0[b]) / (se[a] * se[b]);
            r(Eigen::Index(a), Eigen::Index(b)) = r(Eigen::Index(b), Eigen::Index(a)) = rho;
        }
    return CorrelationMatrix(std::move(r));
}

double equal_recruitment_correlation(double n0, double n_a, double n_b)
{
    return 1.0 / std::sqrt((n0 / n_a + 1.0) * (n0 / n_b + 1.0));
}

double three_period_correlation(double n01, double n02, double n03)
{
    return 0.5 * n02 / std::sqrt((n01 + n02) * (n02 + n03));
}

Eigen::MatrixXd empirical_correlation(const PlatformDesign& design,
                                      const std::vector<double>& effects, std::int64_t reps,
                                      std::uint64_t seed)
{
    if (reps < 10000) throw invalid_argument("empirical correlation needs at least 10000 reps");
    const auto m = Eigen::Index(design.arms());
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(m);
    Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(m, m);
    const ZStatSimulator sim(design, effects, SimulationMode::sufficient_statistic);
    const Philox4x32 gen(seed);
    std::vector<double> z;
    for (std::int64_t r = 0; r < reps; ++r) {
        sim.simulate(gen, static_cast<std::uint64_t>(r), z);
        const Eigen::Map<const Eigen::VectorXd> v(z.data(), m);
        sum += v;
        cross.noalias() += v * v.transpose();
    }
    const double n = double(reps);
    const Eigen::VectorXd mean = sum / n;
    Eigen::MatrixXd cov = (cross - n * mean * mean.transpose()) / (n - 1.0);
    const Eigen::VectorXd inv_sd = cov.diagonal().cwiseSqrt().cwiseInverse();
    return inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
}

}  // namespace platform
