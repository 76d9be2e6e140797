#pragma once
#include <string>
#include <vector>
#include <platform/correlation.hpp>
#include <platform/distributions.hpp>

namespace platform {

enum class AdjustmentMethod { unadjusted, bonferroni, dunnett };

std::string to_string(AdjustmentMethod method);
AdjustmentMethod adjustment_from_string(const std::string& s);
std::string to_string(Sidedness sidedness);
Sidedness sidedness_from_string(const std::string& s);

struct AdjustmentPolicy {
    AdjustmentMethod method = AdjustmentMethod::unadjusted;
    double alpha = 0.05;
    Sidedness sidedness = Sidedness::two_sided;

    /* Throws invalid_argument unless 0 < alpha < 1. */
    void validate() const;
};

/*
 * Common critical value applied to every comparison. Dunnett values are
 * memoized per (matrix, alpha, sidedness).
 */
double rejection_threshold(const AdjustmentPolicy& policy, const CorrelationMatrix& corr);

/* Single-step test; |z| equal to the threshold is not a rejection. */
bool exceeds(double z, double threshold, Sidedness sidedness);

std::vector<bool> decide_rejections(const std::vector<double>& z, const AdjustmentPolicy& policy,
                                    const CorrelationMatrix& corr);

}  // namespace platform
