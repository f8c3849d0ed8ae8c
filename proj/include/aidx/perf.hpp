#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aidx/corpus.hpp"

namespace aidx::perf {

using corpus::ReturnSeries;
using corpus::RiskFreeCurve;

struct Moments {
    double mean = 0.0;
    double sd = 0.0;  // sample sd, n-1
    std::optional<double> skew;  // third standardized moment; empty when sd = 0
    std::optional<double> kurt;  // fourth standardized moment, not excess
    int n = 0;
};

/// Throws ComputationError for fewer than 4 observations.
Moments moments(std::span<const double> returns);

/// OLS intercept and slope of `r` on `benchmark`, paired by date; needs at
/// least 30 paired observations.
std::pair<double, double> alpha_beta(const ReturnSeries& r, const ReturnSeries& benchmark);

/// Sharpe ratio (mean excess return over total sd), daily risk-free rate
/// taken from the curve per date. Empty when sd = 0.
std::optional<double> sharpe(const ReturnSeries& r, const RiskFreeCurve& rf);

enum class DownsideThreshold { Zero, RiskFree };

/// Sortino ratio. The downside deviation is the population sd of the
/// below-threshold subset (strictly negative returns by default, returns
/// below the daily risk-free rate with DownsideThreshold::RiskFree). Empty
/// when the subset is empty or has zero dispersion.
std::optional<double> sortino(const ReturnSeries& r, const RiskFreeCurve& rf,
                              DownsideThreshold threshold = DownsideThreshold::Zero);

/// Maximum peak-to-trough decline in percent, single pass over the levels.
/// Levels must be positive; fewer than 2 levels is an error.
double max_drawdown(std::span<const double> levels);

/// Empirical Omega ratio: gains mass over losses mass relative to the daily
/// risk-free rate. +infinity when no return falls below the threshold.
double omega(const ReturnSeries& r, const RiskFreeCurve& rf);

/// One Table-style panel row. `ret` and `mdd` are percentages; everything
/// else is in daily decimal units.
struct PerfMetrics {
    std::string ticker;
    double ret = 0.0;
    double sd = 0.0;
    std::optional<double> skew;
    std::optional<double> kurt;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<double> sharpe;
    std::optional<double> sortino;
    double mdd = 0.0;
    double omega = 0.0;
};

/// Computes the full metrics row for one series. The benchmark is optional
/// (the benchmark's own row has no alpha/beta). Levels for the drawdown are
/// rebuilt from the log returns, which leaves MDD unaffected by scale.
PerfMetrics metrics_row(const ReturnSeries& r, const ReturnSeries* benchmark,
                        const RiskFreeCurve& rf,
                        DownsideThreshold threshold = DownsideThreshold::Zero);

/// `ticker,ret,sd,skew,kurt,alpha,beta,sr,sor,mdd,omega`; undefined metrics
/// print as "nan".
void write_panel_csv(const std::filesystem::path& path, const std::vector<PerfMetrics>& rows);

struct EtfReferenceRow {
    std::string ticker;
    std::string full_name;
    std::string inception;
    double expense_ratio = 0.0;
    int n_assets = 0;
};

/// Bundled ETF reference table (`ticker,full_name,inception,expense_ratio,n_assets`).
std::vector<EtfReferenceRow> load_etf_reference(const std::filesystem::path& path);

/// `ticker,expense_ratio,mean_daily_return` for every reference ETF with a
/// return series, sorted by ticker.
void write_expense_scatter_csv(const std::filesystem::path& path,
                               const std::vector<EtfReferenceRow>& reference,
                               const std::map<std::string, ReturnSeries>& returns);

}  // namespace aidx::perf
