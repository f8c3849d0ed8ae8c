#include "aidx/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "aidx/errors.hpp"

namespace aidx::stats {

double mean(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

// Continued fraction for the incomplete beta function (Lentz's method).
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;

    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log1p(-x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
    if (df <= 0.0) throw ComputationError("stats", "t distribution needs positive df");
    if (!std::isfinite(t)) return 0.0;
    return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> xs, int exact_threshold) {
    WilcoxonResult res;
    std::vector<double> nonzero;
    for (double x : xs)
        if (x != 0.0) nonzero.push_back(x);
    res.n_nonzero = static_cast<int>(nonzero.size());
    if (nonzero.empty()) return res;  // all-zero sample: statistic undefined
    res.defined = true;

    const std::size_t n = nonzero.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::fabs(nonzero[a]) < std::fabs(nonzero[b]);
    });

    // Average ranks for tied absolute values.
    std::vector<double> rank(n);
    double tie_correction = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n &&
               std::fabs(nonzero[order[j + 1]]) == std::fabs(nonzero[order[i]]))
            ++j;
        double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        double t = static_cast<double>(j - i + 1);
        tie_correction += t * t * t - t;
        i = j + 1;
    }

    double w_plus = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        if (nonzero[k] > 0.0) w_plus += rank[k];
    res.w_plus = w_plus;

    const double nn = static_cast<double>(n);
    const double mu = nn * (nn + 1.0) / 4.0;
    double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_correction / 48.0;
    if (var > 0.0) {
        double cc = w_plus > mu ? -0.5 : (w_plus < mu ? 0.5 : 0.0);
        res.z = (w_plus - mu + cc) / std::sqrt(var);
    } else {
        res.z = 0.0;
    }

    if (res.n_nonzero <= exact_threshold) {
        // Exact distribution of W+ over all 2^n sign assignments of the
        // observed ranks. Ranks are half-integers at worst, so doubling
        // them makes the convolution integral.
        std::vector<long> r2(n);
        long total = 0;
        for (std::size_t k = 0; k < n; ++k) {
            r2[k] = static_cast<long>(std::llround(2.0 * rank[k]));
            total += r2[k];
        }
        std::vector<double> ways(static_cast<std::size_t>(total) + 1, 0.0);
        ways[0] = 1.0;
        long reached = 0;
        for (std::size_t k = 0; k < n; ++k) {
            reached += r2[k];
            for (long w = reached; w >= r2[k]; --w)
                ways[static_cast<std::size_t>(w)] +=
                    ways[static_cast<std::size_t>(w - r2[k])];
        }
        const double denom = std::ldexp(1.0, static_cast<int>(n));  // 2^n
        long w2 = static_cast<long>(std::llround(2.0 * w_plus));
        double p_le = 0.0, p_ge = 0.0;
        for (long w = 0; w <= total; ++w) {
            if (w <= w2) p_le += ways[static_cast<std::size_t>(w)];
            if (w >= w2) p_ge += ways[static_cast<std::size_t>(w)];
        }
        res.p = std::min(1.0, 2.0 * std::min(p_le, p_ge) / denom);
        res.exact = true;
    } else {
        res.p = 2.0 * (1.0 - normal_cdf(std::fabs(res.z)));
    }
    return res;
}

}  // namespace aidx::stats
