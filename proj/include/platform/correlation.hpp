#pragma once
#include <cstddef>
#include <cstdint>
#include <vector>
#include <Eigen/Core>
#include <platform/design.hpp>

namespace platform {

/*
 * Correlation matrix of the comparison z-statistics. Symmetric with unit
 * diagonal, entries in [0, 1] and positive semidefinite.
 */
class CorrelationMatrix {
public:
    /* Validates the invariants above; throws invalid_argument. */
    explicit CorrelationMatrix(Eigen::MatrixXd entries);

    static CorrelationMatrix identity(std::size_t dim);
    static CorrelationMatrix equicorrelated(std::size_t dim, double rho);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
    double operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }
    const Eigen::MatrixXd& matrix() const noexcept { return entries_; }

    double min_eigenvalue() const;

    /* Rows/columns reordered so that new index i holds old index perm[i]. */
    CorrelationMatrix permuted(const std::vector<std::size_t>& perm) const;

    std::vector<std::vector<double>> to_rows() const;

    friend bool operator==(const CorrelationMatrix& a, const CorrelationMatrix& b)
    {
        return a.entries_ == b.entries_;
    }

private:
    Eigen::MatrixXd entries_;
};

/*
 * Correlation of the comparison statistics induced by shared concurrent
 * controls:
 *
 *   rho(j, j') = overlap / (n0_j * n0_j')
 *                / (sqrt(1/n_j + 1/n0_j) * sqrt(1/n_j' + 1/n0_j'))
 *
 * where overlap is the number of control patients concurrent to both arms.
 * Individual-control designs give the identity.
 */
CorrelationMatrix analytic_correlation(const PlatformDesign& design);

/* Single-period closed form 1 / sqrt((n0/n_j + 1)(n0/n_j' + 1)). */
double equal_recruitment_correlation(double n0, double n_a, double n_b);

/*
 * Three-period closed form for arms recruiting in periods (1,2) and (2,3)
 * with per-period arm counts equal to the control counts.
 */
double three_period_correlation(double n01, double n02, double n03);

/* Pearson correlation of simulated z-vectors (reps >= 10000). */
Eigen::MatrixXd empirical_correlation(const PlatformDesign& design,
                                      const std::vector<double>& effects, std::int64_t reps,
                                      std::uint64_t seed);

}  // namespace platform
