#include "aidx/perf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <Eigen/Dense>

#include "aidx/csv.hpp"
#include "aidx/errors.hpp"
#include "aidx/regress.hpp"
#include "aidx/stats.hpp"

namespace aidx::perf {

Moments moments(std::span<const double> returns) {
    if (returns.size() < 4)
        throw ComputationError("perf", "insufficient data: moments need n >= 4");
    Moments m;
    m.n = static_cast<int>(returns.size());
    m.mean = stats::mean(returns);
    m.sd = stats::sample_sd(returns);

    const double n = static_cast<double>(returns.size());
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : returns) {
        double d = x - m.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (m2 > 0.0) {
        m.skew = m3 / std::pow(m2, 1.5);
        m.kurt = m4 / (m2 * m2);
    }
    return m;
}

std::pair<double, double> alpha_beta(const ReturnSeries& r, const ReturnSeries& benchmark) {
    std::map<long, double> bench;
    for (const auto& o : benchmark.observations) bench[o.date.serial()] = o.log_return;
    std::vector<double> ri, rb;
    for (const auto& o : r.observations) {
        auto it = bench.find(o.date.serial());
        if (it == bench.end()) continue;
        ri.push_back(o.log_return);
        rb.push_back(it->second);
    }
    if (ri.size() < 30)
        throw ComputationError("perf", "alpha/beta needs >= 30 paired observations for " + r.ticker);
    Eigen::VectorXd y(static_cast<Eigen::Index>(ri.size()));
    Eigen::MatrixXd x(static_cast<Eigen::Index>(ri.size()), 2);
    for (std::size_t i = 0; i < ri.size(); ++i) {
        y(static_cast<Eigen::Index>(i)) = ri[i];
        x(static_cast<Eigen::Index>(i), 0) = 1.0;
        x(static_cast<Eigen::Index>(i), 1) = rb[i];
    }
    auto fit = regress::ols(y, x, {"alpha", "beta"});
    return {fit.coefficients[0].estimate, fit.coefficients[1].estimate};
}

namespace {

struct ExcessSeries {
    std::vector<double> returns;
    std::vector<double> daily_rf;
};

ExcessSeries match_risk_free(const ReturnSeries& r, const RiskFreeCurve& rf) {
    ExcessSeries out;
    out.returns.reserve(r.observations.size());
    for (const auto& o : r.observations) {
        out.returns.push_back(o.log_return);
        out.daily_rf.push_back(rf.daily_rate(o.date));
    }
    return out;
}

}  // namespace

std::optional<double> sharpe(const ReturnSeries& r, const RiskFreeCurve& rf) {
    if (r.observations.size() < 2)
        throw ComputationError("perf", "sharpe needs at least 2 returns");
    auto ex = match_risk_free(r, rf);
    double sd = stats::sample_sd(ex.returns);
    if (sd <= 0.0) return std::nullopt;
    return (stats::mean(ex.returns) - stats::mean(ex.daily_rf)) / sd;
}

std::optional<double> sortino(const ReturnSeries& r, const RiskFreeCurve& rf,
                              DownsideThreshold threshold) {
    if (r.observations.empty())
        throw ComputationError("perf", "sortino needs returns");
    auto ex = match_risk_free(r, rf);
    std::vector<double> downside;
    for (std::size_t i = 0; i < ex.returns.size(); ++i) {
        double bound = threshold == DownsideThreshold::Zero ? 0.0 : ex.daily_rf[i];
        if (ex.returns[i] < bound) downside.push_back(ex.returns[i]);
    }
    if (downside.empty()) return std::nullopt;
    double m = stats::mean(downside);
    double ss = 0.0;
    for (double x : downside) ss += (x - m) * (x - m);
    double sd_down = std::sqrt(ss / static_cast<double>(downside.size()));
    if (sd_down <= 0.0) return std::nullopt;
    return (stats::mean(ex.returns) - stats::mean(ex.daily_rf)) / sd_down;
}

double max_drawdown(std::span<const double> levels) {
    if (levels.size() < 2)
        throw ComputationError("perf", "max drawdown needs at least 2 levels");
    double peak = levels[0];
    double worst = 0.0;
    for (double level : levels) {
        if (!(level > 0.0))
            throw ComputationError("perf", "max drawdown needs positive levels");
        peak = std::max(peak, level);
        worst = std::max(worst, (peak - level) / peak);
    }
    return worst * 100.0;
}

double omega(const ReturnSeries& r, const RiskFreeCurve& rf) {
    if (r.observations.empty())
        throw ComputationError("perf", "omega needs returns");
    auto ex = match_risk_free(r, rf);
    double gains = 0.0, losses = 0.0;
    for (std::size_t i = 0; i < ex.returns.size(); ++i) {
        double diff = ex.returns[i] - ex.daily_rf[i];
        if (diff > 0.0) gains += diff;
        else losses -= diff;
    }
    if (losses <= 0.0) return std::numeric_limits<double>::infinity();
    return gains / losses;
}

PerfMetrics metrics_row(const ReturnSeries& r, const ReturnSeries* benchmark,
                        const RiskFreeCurve& rf, DownsideThreshold threshold) {
    PerfMetrics row;
    row.ticker = r.ticker;
    std::vector<double> rets;
    rets.reserve(r.observations.size());
    for (const auto& o : r.observations) rets.push_back(o.log_return);

    Moments m = moments(rets);
    row.ret = m.mean * 100.0;
    row.sd = m.sd;
    row.skew = m.skew;
    row.kurt = m.kurt;

    if (benchmark != nullptr) {
        auto [a, b] = alpha_beta(r, *benchmark);
        row.alpha = a;
        row.beta = b;
    }
    row.sharpe = sharpe(r, rf);
    row.sortino = sortino(r, rf, threshold);

    std::vector<double> levels;
    levels.reserve(rets.size() + 1);
    double level = 1.0;
    levels.push_back(level);
    for (double lr : rets) {
        level *= std::exp(lr);
        levels.push_back(level);
    }
    row.mdd = max_drawdown(levels);
    row.omega = omega(r, rf);
    return row;
}

namespace {

std::string opt_g12(const std::optional<double>& v) {
    return v ? csv::format_g12(*v) : "nan";
}

}  // namespace

void write_panel_csv(const std::filesystem::path& path, const std::vector<PerfMetrics>& rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("perf", "cannot write " + path.string());
    out << "ticker,ret,sd,skew,kurt,alpha,beta,sr,sor,mdd,omega\n";
    for (const auto& r : rows)
        out << r.ticker << ',' << csv::format_g12(r.ret) << ',' << csv::format_g12(r.sd) << ','
            << opt_g12(r.skew) << ',' << opt_g12(r.kurt) << ',' << opt_g12(r.alpha) << ','
            << opt_g12(r.beta) << ',' << opt_g12(r.sharpe) << ',' << opt_g12(r.sortino) << ','
            << csv::format_g12(r.mdd) << ',' << csv::format_g12(r.omega) << '\n';
}

std::vector<EtfReferenceRow> load_etf_reference(const std::filesystem::path& path) {
    auto rows = csv::read_file(path);
    if (rows.empty() || rows.front().size() != 5)
        throw DataError("perf", "bad ETF reference table " + path.string());
    std::vector<EtfReferenceRow> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        std::string where = "etf reference row " + std::to_string(r + 1);
        out.push_back({row[0], row[1], row[2], csv::parse_double(row[3], where),
                       static_cast<int>(csv::parse_long(row[4], where))});
    }
    return out;
}

void write_expense_scatter_csv(const std::filesystem::path& path,
                               const std::vector<EtfReferenceRow>& reference,
                               const std::map<std::string, ReturnSeries>& returns) {
    std::vector<const EtfReferenceRow*> rows;
    for (const auto& ref : reference)
        if (returns.count(ref.ticker)) rows.push_back(&ref);
    std::sort(rows.begin(), rows.end(),
              [](const EtfReferenceRow* a, const EtfReferenceRow* b) { return a->ticker < b->ticker; });
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("perf", "cannot write " + path.string());
    out << "ticker,expense_ratio,mean_daily_return\n";
    for (const auto* ref : rows) {
        const auto& series = returns.at(ref->ticker);
        std::vector<double> rets;
        for (const auto& o : series.observations) rets.push_back(o.log_return);
        out << ref->ticker << ',' << csv::format_g12(ref->expense_ratio) << ','
            << csv::format_g12(stats::mean(rets)) << '\n';
    }
}

}  // namespace aidx::perf
