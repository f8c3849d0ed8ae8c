#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aidx/corpus.hpp"
#include "aidx/stats.hpp"

namespace aidx::eventstudy {

using corpus::Cik;
using corpus::ReturnSeries;

/// Event geometry. Trading days are the market series' dates; day 0 is the
/// first market date on or after `event_date`, the event window covers days
/// [0, event_length - 1], and the estimation window is the
/// `estimation_length` market dates immediately before day 0.
struct EventWindowSpec {
    Date event_date;
    int estimation_length = 251;
    int event_length = 61;
    ReturnSeries market;
};

struct MarketModelFit {
    double alpha_hat = 0.0;
    double beta_hat = 0.0;
    double residual_sd = 0.0;  // sample sd of residuals, n-2 denominator
    int n_obs = 0;
};

/// OLS of the stock on the market over the estimation window, intercept
/// included. Throws ComputationError for fewer than 30 paired observations
/// or a zero-variance market.
MarketModelFit fit_market_model(const ReturnSeries& stock, const EventWindowSpec& spec);

struct ArPoint {
    Date date;
    int day = 0;  // 0-based event-window day
    double ar = 0.0;
};

/// AR_t = R_t - (alpha + beta * R_m,t) on every event-window date where the
/// stock has a return; missing days are simply absent. Throws
/// ComputationError when the stock never overlaps the window.
std::vector<ArPoint> abnormal_returns(const ReturnSeries& stock, const MarketModelFit& fit,
                                      const EventWindowSpec& spec);

struct SecurityResult {
    Cik cik;
    std::vector<ArPoint> ars;
    double car = 0.0;  // sum of ARs over the window
};

struct CaarResult {
    std::vector<double> caar_path;  // day k: mean CAR-through-day-k
    std::vector<double> se_path;    // cross-sectional standard error per day
    double t_stat = 0.0;
    bool zero_variance = false;
    stats::WilcoxonResult wilcoxon;
    int n = 0;
};

/// Cross-sectional aggregation: per-security CARs, the CAAR path, a
/// one-sample t-test of the CARs against zero and the Wilcoxon signed-rank
/// test. Needs at least two securities.
CaarResult caar(const std::vector<SecurityResult>& securities, int event_length);

struct TwoSampleT {
    double mean_a = 0.0;
    double mean_b = 0.0;
    double difference = 0.0;
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
};

/// Welch two-sample t-test on the difference of means (a minus b).
TwoSampleT two_sample_t(std::span<const double> group_a, std::span<const double> group_b);

}  // namespace aidx::eventstudy
