#pragma once

#include <span>

namespace aidx::stats {

double mean(std::span<const double> xs);

/// Sample standard deviation (n-1 denominator).
double sample_sd(std::span<const double> xs);

/// Standard normal CDF.
double normal_cdf(double x);

/// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// Two-sided p-value of a Student-t statistic with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

/// Wilcoxon signed-rank test of a sample against zero. Zero differences are
/// dropped; ties get average ranks. The p-value is exact (full sign
/// enumeration over the observed ranks) for up to `exact_threshold` nonzero
/// observations, otherwise a normal approximation with continuity and tie
/// corrections. `defined` is false when every observation is zero.
struct WilcoxonResult {
    double w_plus = 0.0;
    double z = 0.0;
    double p = 1.0;
    int n_nonzero = 0;
    bool defined = false;
    bool exact = false;
};

WilcoxonResult wilcoxon_signed_rank(std::span<const double> xs, int exact_threshold = 25);

}  // namespace aidx::stats
