#include "aidx/eventstudy.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "aidx/errors.hpp"
#include "aidx/regress.hpp"

namespace aidx::eventstudy {

namespace {

// Index of event day 0 within the market series, plus bounds checks for the
// estimation and event windows.
struct WindowIndices {
    std::size_t day0 = 0;
    std::size_t est_begin = 0;
};

WindowIndices locate_windows(const EventWindowSpec& spec) {
    const auto& obs = spec.market.observations;
    if (spec.estimation_length < 30)
        throw ComputationError("eventstudy", "estimation window shorter than 30 days");
    if (spec.event_length < 1)
        throw ComputationError("eventstudy", "event window needs at least one day");
    auto it = std::lower_bound(obs.begin(), obs.end(), spec.event_date,
                               [](const corpus::ReturnObs& o, const Date& d) { return o.date < d; });
    if (it == obs.end())
        throw ComputationError("eventstudy", "event date after the last market observation");
    std::size_t day0 = static_cast<std::size_t>(it - obs.begin());
    if (day0 < static_cast<std::size_t>(spec.estimation_length))
        throw ComputationError("eventstudy", "not enough market history before the event");
    if (day0 + static_cast<std::size_t>(spec.event_length) > obs.size())
        throw ComputationError("eventstudy", "market series ends inside the event window");
    return {day0, day0 - static_cast<std::size_t>(spec.estimation_length)};
}

}  // namespace

MarketModelFit fit_market_model(const ReturnSeries& stock, const EventWindowSpec& spec) {
    auto win = locate_windows(spec);
    const auto& market = spec.market.observations;

    std::unordered_map<long, double> stock_by_date;
    stock_by_date.reserve(stock.observations.size());
    for (const auto& o : stock.observations) stock_by_date[o.date.serial()] = o.log_return;

    std::vector<double> ri, rm;
    for (std::size_t i = win.est_begin; i < win.day0; ++i) {
        auto it = stock_by_date.find(market[i].date.serial());
        if (it == stock_by_date.end()) continue;
        ri.push_back(it->second);
        rm.push_back(market[i].log_return);
    }
    const int n = static_cast<int>(ri.size());
    if (n < 30)
        throw ComputationError("eventstudy", "estimation error: only " + std::to_string(n) +
                                                 " paired observations for " + stock.ticker);

    Eigen::VectorXd y(n);
    Eigen::MatrixXd x(n, 2);
    for (int i = 0; i < n; ++i) {
        y(i) = ri[static_cast<std::size_t>(i)];
        x(i, 0) = 1.0;
        x(i, 1) = rm[static_cast<std::size_t>(i)];
    }
    regress::RegressionFit fit;
    try {
        fit = regress::ols(y, x, {"alpha", "beta"});
    } catch (const ComputationError&) {
        throw ComputationError("eventstudy", "singular market model for " + stock.ticker +
                                                 " (zero market variance)");
    }

    MarketModelFit out;
    out.alpha_hat = fit.coefficients[0].estimate;
    out.beta_hat = fit.coefficients[1].estimate;
    out.n_obs = n;
    double rss = 0.0;
    for (int i = 0; i < n; ++i) {
        double resid = y(i) - out.alpha_hat - out.beta_hat * x(i, 1);
        rss += resid * resid;
    }
    out.residual_sd = std::sqrt(rss / static_cast<double>(n - 2));
    return out;
}

std::vector<ArPoint> abnormal_returns(const ReturnSeries& stock, const MarketModelFit& fit,
                                      const EventWindowSpec& spec) {
    auto win = locate_windows(spec);
    const auto& market = spec.market.observations;

    std::unordered_map<long, double> stock_by_date;
    stock_by_date.reserve(stock.observations.size());
    for (const auto& o : stock.observations) stock_by_date[o.date.serial()] = o.log_return;

    std::vector<ArPoint> out;
    for (int day = 0; day < spec.event_length; ++day) {
        const auto& mkt = market[win.day0 + static_cast<std::size_t>(day)];
        auto it = stock_by_date.find(mkt.date.serial());
        if (it == stock_by_date.end()) continue;  // gap: day absent from output
        double expected = fit.alpha_hat + fit.beta_hat * mkt.log_return;
        out.push_back({mkt.date, day, it->second - expected});
    }
    if (out.empty())
        throw ComputationError("eventstudy", "empty window: " + stock.ticker +
                                                 " has no event-window returns");
    return out;
}

CaarResult caar(const std::vector<SecurityResult>& securities, int event_length) {
    if (securities.size() < 2)
        throw ComputationError("eventstudy", "degenerate sample: need at least 2 securities");

    CaarResult res;
    res.n = static_cast<int>(securities.size());

    // Per-security CAR path over event days; a missing day adds nothing.
    const std::size_t days = static_cast<std::size_t>(event_length);
    std::vector<std::vector<double>> car_paths;
    std::vector<double> cars;
    for (const auto& sec : securities) {
        std::vector<double> incr(days, 0.0);
        for (const auto& pt : sec.ars) incr[static_cast<std::size_t>(pt.day)] += pt.ar;
        double cum = 0.0;
        for (auto& v : incr) {
            cum += v;
            v = cum;
        }
        cars.push_back(cum);
        car_paths.push_back(std::move(incr));
    }

    const double n = static_cast<double>(res.n);
    res.caar_path.resize(days);
    res.se_path.resize(days);
    for (std::size_t k = 0; k < days; ++k) {
        double m = 0.0;
        for (const auto& path : car_paths) m += path[k];
        m /= n;
        double ss = 0.0;
        for (const auto& path : car_paths) ss += (path[k] - m) * (path[k] - m);
        res.caar_path[k] = m;
        res.se_path[k] = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }

    const double car_mean = stats::mean(cars);
    const double car_sd = stats::sample_sd(cars);
    if (car_sd > 0.0) {
        res.t_stat = car_mean / (car_sd / std::sqrt(n));
    } else {
        res.t_stat = 0.0;
        res.zero_variance = true;
    }
    res.wilcoxon = stats::wilcoxon_signed_rank(cars);
    return res;
}

TwoSampleT two_sample_t(std::span<const double> group_a, std::span<const double> group_b) {
    if (group_a.size() < 2 || group_b.size() < 2)
        throw ComputationError("eventstudy", "two-sample t needs n >= 2 per group");
    TwoSampleT res;
    res.mean_a = stats::mean(group_a);
    res.mean_b = stats::mean(group_b);
    res.difference = res.mean_a - res.mean_b;

    const double na = static_cast<double>(group_a.size());
    const double nb = static_cast<double>(group_b.size());
    const double sa = stats::sample_sd(group_a);
    const double sb = stats::sample_sd(group_b);
    const double va = sa * sa / na;
    const double vb = sb * sb / nb;
    if (va + vb <= 0.0) {
        if (res.difference == 0.0)
            throw ComputationError("eventstudy", "degenerate two-sample t: zero variance in both groups");
        res.t = std::numeric_limits<double>::infinity();
        res.df = na + nb - 2.0;
        res.p = 0.0;
        return res;
    }
    res.t = res.difference / std::sqrt(va + vb);
    res.df = (va + vb) * (va + vb) /
             (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    res.p = stats::student_t_two_sided_p(res.t, res.df);
    return res;
}

}  // namespace aidx::eventstudy
