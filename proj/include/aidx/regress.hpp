#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace aidx::regress {

struct Coefficient {
    std::string name;
    double estimate = 0.0;
    double std_error = 0.0;
    double p_value = 1.0;
};

struct RegressionFit {
    std::string method;  // "OLS" or "MM"
    std::vector<Coefficient> coefficients;
    double r_squared = 0.0;  // pseudo-R^2 for MM
    int n_obs = 0;
    bool converged = true;
    std::uint64_t seed = 0;  // MM only
};

/// Least squares through a column-pivoted Householder QR. Classical standard
/// errors; p-values from the t distribution with n - p degrees of freedom.
/// Throws ComputationError on rank deficiency or n <= p.
RegressionFit ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                  const std::vector<std::string>& names);

struct MmOptions {
    std::uint64_t seed = 42;
    int n_subsets = 500;        // random p-point elemental subsets
    double c_scale = 1.547;     // bisquare tuning for the S-scale (50% breakdown)
    double c_efficiency = 4.685;  // bisquare tuning for the M-step (95% efficiency)
    double tolerance = 1e-8;    // max coefficient change declaring convergence
    int max_iterations = 500;
};

/// MM-estimator: high-breakdown S-estimate of coefficients and scale from
/// seeded random elemental subsets, followed by bisquare IRLS at fixed
/// scale. Standard errors come from the M-estimation sandwich; p-values use
/// the normal reference distribution; r_squared is
/// 1 - objective(fit) / objective(intercept only). Non-convergence is
/// reported through `converged`, not an exception. Requires n >= 3p.
RegressionFit mm_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                     const std::vector<std::string>& names, const MmOptions& options = {});

}  // namespace aidx::regress
