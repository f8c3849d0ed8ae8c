#include "aidx/index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "aidx/csv.hpp"
#include "aidx/errors.hpp"

namespace aidx::index {

std::string IndexSpec::name() const {
    switch (scheme) {
        case Scheme::AII: return "aii";
        case Scheme::SAII: return "saii";
        case Scheme::TAII:
            if (discount == 0.5) return "taii05";
            if (discount == 5.0) return "taii5x";
            return "taii" + csv::format_g12(discount);
    }
    return "index";
}

double discounted_engagement(const std::vector<int>& dummies_recent_first, double alpha) {
    double sum = 0.0;
    double factor = 1.0;  // alpha^0, also for alpha = 0
    for (int dummy : dummies_recent_first) {
        if (dummy) sum += factor;
        factor *= alpha;
    }
    return sum;
}

WeightVector compute_weights(const IndexSpec& spec, const std::vector<AiScoreRecord>& records,
                             int filing_year) {
    WeightVector out;
    out.effective_year = filing_year + 1;

    if (spec.scheme == Scheme::AII || spec.scheme == Scheme::SAII) {
        std::map<Cik, double> scores;
        for (const auto& rec : records)
            if (rec.filing_year == filing_year && rec.dummy) scores[rec.cik] = rec.score;
        if (scores.empty())
            throw ComputationError("index", "empty index: no firm mentions AI in " +
                                                std::to_string(filing_year));
        if (spec.scheme == Scheme::AII) {
            double w = 1.0 / static_cast<double>(scores.size());
            for (const auto& [cik, s] : scores) out.entries[cik] = w;
        } else {
            double total = 0.0;
            for (const auto& [cik, s] : scores) total += s;
            if (total <= 0.0)
                throw ComputationError("index",
                                       "degenerate weights: all AI scores are zero in " +
                                           std::to_string(filing_year));
            for (const auto& [cik, s] : scores) out.entries[cik] = s / total;
        }
        return out;
    }

    // TAII: discounted engagement over the dummy history ending at filing_year.
    int first_year = filing_year;
    std::map<Cik, std::map<int, bool>> dummies;
    for (const auto& rec : records) {
        if (rec.filing_year > filing_year) continue;
        first_year = std::min(first_year, rec.filing_year);
        dummies[rec.cik][rec.filing_year] = rec.dummy;
    }
    std::map<Cik, double> engagement;
    double total = 0.0;
    for (const auto& [cik, by_year] : dummies) {
        std::vector<int> history;
        for (int y = filing_year; y >= first_year; --y) {
            auto it = by_year.find(y);
            history.push_back(it != by_year.end() && it->second ? 1 : 0);
        }
        double d = discounted_engagement(history, spec.discount);
        if (d > 0.0) {
            engagement[cik] = d;
            total += d;
        }
    }
    if (engagement.empty())
        throw ComputationError("index", "empty index: no firm has AI engagement through " +
                                            std::to_string(filing_year));
    for (const auto& [cik, d] : engagement) out.entries[cik] = d / total;
    return out;
}

IndexSeries chain_index(const IndexSpec& spec, const std::vector<WeightVector>& weights_by_year,
                        const std::map<Cik, ReturnSeries>& returns,
                        const std::vector<Date>& calendar) {
    if (calendar.size() < 2)
        throw ComputationError("index", "calendar needs a base date plus trading dates");
    for (std::size_t i = 1; i < calendar.size(); ++i)
        if (!(calendar[i - 1] < calendar[i]))
            throw ComputationError("index", "calendar error: dates not strictly increasing at " +
                                                calendar[i].str());

    std::map<int, const WeightVector*> by_year;
    for (const auto& wv : weights_by_year) by_year[wv.effective_year] = &wv;

    // Per-constituent date -> simple return lookup.
    std::unordered_map<std::string, std::unordered_map<long, double>> simple;
    for (const auto& [cik, series] : returns) {
        auto& m = simple[cik.value];
        m.reserve(series.observations.size());
        for (const auto& obs : series.observations)
            m[obs.date.serial()] = std::expm1(obs.log_return);
    }

    IndexSeries out;
    out.spec = spec;
    out.levels.emplace_back(calendar.front(), spec.base_level);

    int active_year = 0;
    std::vector<std::pair<Cik, double>> active;  // renormalized weights
    double level = spec.base_level;

    for (std::size_t i = 1; i < calendar.size(); ++i) {
        const Date& date = calendar[i];
        if (date.year != active_year) {
            auto it = by_year.find(date.year);
            if (it == by_year.end())
                throw ComputationError("index", "no weight vector effective for year " +
                                                    std::to_string(date.year));
            active_year = date.year;
            active.assign(it->second->entries.begin(), it->second->entries.end());
            // Constituents with no data on the year's first trading day are
            // excluded up front and the rest renormalized.
            std::vector<std::pair<Cik, double>> kept;
            double kept_weight = 0.0;
            for (const auto& [cik, w] : active) {
                auto sit = simple.find(cik.value);
                if (sit != simple.end() && sit->second.count(date.serial())) {
                    kept.emplace_back(cik, w);
                    kept_weight += w;
                } else {
                    out.warnings.push_back(date.str() + " " + cik.value +
                                           " excluded at rebalance: no data");
                }
            }
            if (kept.empty())
                throw ComputationError("index", "empty index: no constituent has data on " +
                                                    date.str());
            for (auto& [cik, w] : kept) w /= kept_weight;
            active = std::move(kept);
        } else {
            // Mid-year loss: drop from this date onward, renormalize.
            std::vector<std::pair<Cik, double>> kept;
            double kept_weight = 0.0;
            bool dropped = false;
            for (const auto& [cik, w] : active) {
                auto sit = simple.find(cik.value);
                if (sit != simple.end() && sit->second.count(date.serial())) {
                    kept.emplace_back(cik, w);
                    kept_weight += w;
                } else {
                    out.warnings.push_back(date.str() + " " + cik.value + " dropped: no data");
                    dropped = true;
                }
            }
            if (dropped) {
                if (kept.empty())
                    throw ComputationError("index", "empty index: all constituents lost data on " +
                                                        date.str());
                for (auto& [cik, w] : kept) w /= kept_weight;
                active = std::move(kept);
            }
        }

        double portfolio_return = 0.0;
        for (const auto& [cik, w] : active)
            portfolio_return += w * simple[cik.value][date.serial()];
        level = level * (1.0 + portfolio_return);
        if (!(level > 0.0))
            throw ComputationError("index", "index level non-positive on " + date.str());
        out.levels.emplace_back(date, level);
        out.daily_returns.emplace_back(date, portfolio_return);
    }
    return out;
}

void write_weights_csv(const std::filesystem::path& path,
                       const std::vector<WeightVector>& weights) {
    std::vector<const WeightVector*> ordered;
    for (const auto& wv : weights) ordered.push_back(&wv);
    std::sort(ordered.begin(), ordered.end(), [](const WeightVector* a, const WeightVector* b) {
        return a->effective_year < b->effective_year;
    });
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("index", "cannot write " + path.string());
    out << "year,cik,weight\n";
    for (const auto* wv : ordered)
        for (const auto& [cik, w] : wv->entries)
            out << wv->effective_year << ',' << cik.value << ',' << csv::format_g12(w) << '\n';
}

std::vector<WeightVector> read_weights_csv(const std::filesystem::path& path) {
    auto rows = csv::read_file(path);
    if (rows.empty() || rows.front().size() != 3)
        throw DataError("index", "bad weights file " + path.string());
    std::map<int, WeightVector> by_year;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        std::string where = "weights row " + std::to_string(r + 1);
        int year = static_cast<int>(csv::parse_long(row[0], where));
        auto& wv = by_year[year];
        wv.effective_year = year;
        wv.entries[corpus::canonicalize_cik(row[1])] = csv::parse_double(row[2], where);
    }
    std::vector<WeightVector> out;
    for (auto& [year, wv] : by_year) out.push_back(std::move(wv));
    return out;
}

void write_index_csv(const std::filesystem::path& path, const IndexSeries& series) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("index", "cannot write " + path.string());
    out << "date,level,daily_return\n";
    for (std::size_t i = 0; i < series.levels.size(); ++i) {
        double ret = i == 0 ? 0.0 : series.daily_returns[i - 1].second;
        out << series.levels[i].first.str() << ',' << csv::format_g12(series.levels[i].second)
            << ',' << csv::format_g12(ret) << '\n';
    }
}

}  // namespace aidx::index
