#include "aidx/regress.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "aidx/errors.hpp"
#include "aidx/stats.hpp"

namespace aidx::regress {

RegressionFit ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                  const std::vector<std::string>& names) {
    const auto n = x.rows();
    const auto p = x.cols();
    if (y.rows() != n) throw ComputationError("regress", "design/response size mismatch");
    if (static_cast<std::size_t>(p) != names.size())
        throw ComputationError("regress", "coefficient name count mismatch");
    if (n <= p)
        throw ComputationError("regress", "insufficient data: n=" + std::to_string(n) +
                                              " <= p=" + std::to_string(p));

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < p) throw ComputationError("regress", "singular design matrix");
    Eigen::VectorXd beta = qr.solve(y);

    Eigen::VectorXd resid = y - x * beta;
    const double rss = resid.squaredNorm();
    const double sigma2 = rss / static_cast<double>(n - p);
    Eigen::MatrixXd xtx_inv =
        (x.transpose() * x).ldlt().solve(Eigen::MatrixXd::Identity(p, p));

    const double y_mean = y.mean();
    const double tss = (y.array() - y_mean).square().sum();

    RegressionFit fit;
    fit.method = "OLS";
    fit.n_obs = static_cast<int>(n);
    fit.r_squared = tss > 0.0 ? 1.0 - rss / tss : 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
        Coefficient c;
        c.name = names[static_cast<std::size_t>(j)];
        c.estimate = beta(j);
        c.std_error = std::sqrt(std::max(0.0, sigma2 * xtx_inv(j, j)));
        c.p_value = c.std_error > 0.0
                        ? stats::student_t_two_sided_p(c.estimate / c.std_error,
                                                       static_cast<double>(n - p))
                        : (c.estimate == 0.0 ? 1.0 : 0.0);
        fit.coefficients.push_back(std::move(c));
    }
    return fit;
}

namespace {

// Tukey bisquare rho, normalized so rho(inf) = 1.
double rho_bisquare(double u, double c) {
    double a = u / c;
    if (std::fabs(a) >= 1.0) return 1.0;
    double t = 1.0 - a * a;
    return 1.0 - t * t * t;
}

double psi_bisquare(double u, double c) {
    double a = u / c;
    if (std::fabs(a) >= 1.0) return 0.0;
    double t = 1.0 - a * a;
    return u * t * t;
}

double psi_prime_bisquare(double u, double c) {
    double a = u / c;
    if (std::fabs(a) >= 1.0) return 0.0;
    double a2 = a * a;
    return (1.0 - a2) * (1.0 - 5.0 * a2);
}

// Weight for IRLS: psi(u)/u, with the u -> 0 limit.
double weight_bisquare(double u, double c) {
    double a = u / c;
    if (std::fabs(a) >= 1.0) return 0.0;
    double t = 1.0 - a * a;
    return t * t;
}

// M-scale: solves (1/n) sum rho(r_i/s, c) = 0.5 by fixed-point iteration.
double m_scale(const Eigen::VectorXd& resid, double c) {
    const auto n = resid.size();
    std::vector<double> abs_r(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) abs_r[static_cast<std::size_t>(i)] = std::fabs(resid(i));
    std::nth_element(abs_r.begin(), abs_r.begin() + n / 2, abs_r.end());
    double s = abs_r[static_cast<std::size_t>(n / 2)] / 0.6745;
    if (s <= 0.0) {
        // More than half the residuals are exactly zero: exact-fit scale.
        return 0.0;
    }
    for (int iter = 0; iter < 200; ++iter) {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) sum += rho_bisquare(resid(i) / s, c);
        double factor = sum / (0.5 * static_cast<double>(n));
        double s_new = s * std::sqrt(factor);
        if (std::fabs(s_new - s) <= 1e-12 * s) return s_new;
        s = s_new;
    }
    return s;
}

// One weighted least-squares solve; returns false when the weighted design
// is rank deficient (all weights collapsed).
bool weighted_ls(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                 const Eigen::VectorXd& w, Eigen::VectorXd& beta) {
    Eigen::VectorXd sw = w.array().sqrt();
    Eigen::MatrixXd xw = sw.asDiagonal() * x;
    Eigen::VectorXd yw = sw.asDiagonal() * y;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xw);
    if (qr.rank() < x.cols()) return false;
    beta = qr.solve(yw);
    return true;
}

struct SCandidate {
    Eigen::VectorXd beta;
    double scale = std::numeric_limits<double>::infinity();
};

// Refines an S-candidate by iterated reweighted LS with scale updates.
void refine_s(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, double c, SCandidate& cand,
              int max_iter) {
    for (int iter = 0; iter < max_iter; ++iter) {
        Eigen::VectorXd resid = y - x * cand.beta;
        double s = m_scale(resid, c);
        if (s <= 0.0) {
            cand.scale = 0.0;
            return;
        }
        Eigen::VectorXd w(y.size());
        for (Eigen::Index i = 0; i < y.size(); ++i) w(i) = weight_bisquare(resid(i) / s, c);
        Eigen::VectorXd beta_new;
        if (!weighted_ls(y, x, w, beta_new)) {
            cand.scale = s;
            return;
        }
        double change = (beta_new - cand.beta).cwiseAbs().maxCoeff();
        cand.beta = beta_new;
        cand.scale = m_scale(y - x * cand.beta, c);
        if (change < 1e-10) return;
    }
}

}  // namespace

RegressionFit mm_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                     const std::vector<std::string>& names, const MmOptions& options) {
    const auto n = x.rows();
    const auto p = x.cols();
    if (y.rows() != n) throw ComputationError("regress", "design/response size mismatch");
    if (static_cast<std::size_t>(p) != names.size())
        throw ComputationError("regress", "coefficient name count mismatch");
    if (n < 3 * p)
        throw ComputationError("regress", "insufficient data: MM needs n >= 3p");
    {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
        if (qr.rank() < p) throw ComputationError("regress", "singular design matrix");
    }

    // Stage 1: S-estimate via seeded elemental subsets. Each subset draws
    // from its own generator so the search is order-independent and could be
    // distributed without changing results.
    std::vector<SCandidate> best;
    const std::size_t keep = 5;
    for (int k = 0; k < options.n_subsets; ++k) {
        std::mt19937_64 rng(options.seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(k + 1)));
        std::vector<Eigen::Index> idx;
        while (idx.size() < static_cast<std::size_t>(p)) {
            Eigen::Index cand = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n));
            if (std::find(idx.begin(), idx.end(), cand) == idx.end()) idx.push_back(cand);
        }
        Eigen::MatrixXd xs(p, p);
        Eigen::VectorXd ys(p);
        for (Eigen::Index r = 0; r < p; ++r) {
            xs.row(r) = x.row(idx[static_cast<std::size_t>(r)]);
            ys(r) = y(idx[static_cast<std::size_t>(r)]);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(xs);
        if (!lu.isInvertible()) continue;
        SCandidate cand;
        cand.beta = lu.solve(ys);
        cand.scale = m_scale(y - x * cand.beta, options.c_scale);
        best.push_back(std::move(cand));
        std::sort(best.begin(), best.end(),
                  [](const SCandidate& a, const SCandidate& b) { return a.scale < b.scale; });
        if (best.size() > keep) best.resize(keep);
    }
    if (best.empty())
        throw ComputationError("regress", "singular design: no invertible elemental subset");

    for (auto& cand : best) refine_s(y, x, options.c_scale, cand, 50);
    std::sort(best.begin(), best.end(),
              [](const SCandidate& a, const SCandidate& b) { return a.scale < b.scale; });
    Eigen::VectorXd beta = best.front().beta;
    const double scale = best.front().scale;

    RegressionFit fit;
    fit.method = "MM";
    fit.n_obs = static_cast<int>(n);
    fit.seed = options.seed;

    const double scale_floor = 1e-12 * (1.0 + std::fabs(y.cwiseAbs().mean()));
    if (scale <= scale_floor) {
        // Exact fit detected by the S-stage; report it with zero errors.
        for (Eigen::Index j = 0; j < p; ++j)
            fit.coefficients.push_back({names[static_cast<std::size_t>(j)], beta(j), 0.0, 0.0});
        fit.r_squared = 1.0;
        return fit;
    }

    // Stage 2: efficient M-step, IRLS at fixed scale.
    const double c2 = options.c_efficiency;
    fit.converged = false;
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        Eigen::VectorXd resid = y - x * beta;
        Eigen::VectorXd w(n);
        for (Eigen::Index i = 0; i < n; ++i) w(i) = weight_bisquare(resid(i) / scale, c2);
        Eigen::VectorXd beta_new;
        if (!weighted_ls(y, x, w, beta_new)) break;
        double change = (beta_new - beta).cwiseAbs().maxCoeff();
        beta = beta_new;
        if (change < options.tolerance) {
            fit.converged = true;
            break;
        }
    }

    // Sandwich covariance at the final coefficients.
    Eigen::VectorXd resid = y - x * beta;
    double sum_psi2 = 0.0, sum_psi_prime = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double u = resid(i) / scale;
        double psi = psi_bisquare(u, c2);
        sum_psi2 += psi * psi;
        sum_psi_prime += psi_prime_bisquare(u, c2);
    }
    const double nd = static_cast<double>(n);
    double kappa = 0.0;
    if (sum_psi_prime > 0.0)
        kappa = (nd / static_cast<double>(n - p)) * (sum_psi2 / nd) /
                ((sum_psi_prime / nd) * (sum_psi_prime / nd));
    Eigen::MatrixXd xtx_inv =
        (x.transpose() * x).ldlt().solve(Eigen::MatrixXd::Identity(p, p));

    for (Eigen::Index j = 0; j < p; ++j) {
        Coefficient c;
        c.name = names[static_cast<std::size_t>(j)];
        c.estimate = beta(j);
        c.std_error = std::sqrt(std::max(0.0, scale * scale * kappa * xtx_inv(j, j)));
        c.p_value = c.std_error > 0.0
                        ? 2.0 * (1.0 - stats::normal_cdf(std::fabs(c.estimate / c.std_error)))
                        : (c.estimate == 0.0 ? 1.0 : 0.0);
        fit.coefficients.push_back(std::move(c));
    }

    // Pseudo-R^2 against the intercept-only robust objective at the same scale.
    double obj_fit = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) obj_fit += rho_bisquare(resid(i) / scale, c2);
    double mu = y.mean();
    for (int iter = 0; iter < 200; ++iter) {
        double wsum = 0.0, wy = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double w = weight_bisquare((y(i) - mu) / scale, c2);
            wsum += w;
            wy += w * y(i);
        }
        if (wsum <= 0.0) break;
        double mu_new = wy / wsum;
        if (std::fabs(mu_new - mu) < 1e-12 * (1.0 + std::fabs(mu))) {
            mu = mu_new;
            break;
        }
        mu = mu_new;
    }
    double obj_null = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) obj_null += rho_bisquare((y(i) - mu) / scale, c2);
    fit.r_squared = obj_null > 0.0 ? 1.0 - obj_fit / obj_null : 0.0;
    if (fit.r_squared < 0.0) fit.r_squared = 0.0;
    return fit;
}

}  // namespace aidx::regress
