#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "aidx/corpus.hpp"
#include "aidx/textscore.hpp"

namespace aidx::index {

using corpus::Cik;
using corpus::ReturnSeries;
using textscore::AiScoreRecord;

enum class Scheme { AII, SAII, TAII };

struct IndexSpec {
    Scheme scheme = Scheme::AII;
    double discount = 0.0;     // TAII only: 0.5 for TAII05, 5 for TAII5X
    double base_level = 100.0;

    /// "aii", "saii", "taii05", "taii5x", or "taii<alpha>" for other discounts.
    std::string name() const;
};

/// Constituent weights effective for one calendar year; weights sum to 1.
struct WeightVector {
    int effective_year = 0;
    std::map<Cik, double> entries;
};

/// Chained daily index levels. `levels` starts with the base row (level =
/// base_level, no return applied); every later level satisfies
/// level_t = level_{t-1} * (1 + daily_return_t).
struct IndexSeries {
    IndexSpec spec;
    std::vector<std::pair<Date, double>> levels;
    std::vector<std::pair<Date, double>> daily_returns;
    std::vector<std::string> warnings;  // constituents dropped for missing data
};

/// Discounted engagement D = sum_j alpha^j * dummy[j] over the history,
/// most recent first; alpha^0 is 1 even for alpha = 0.
double discounted_engagement(const std::vector<int>& dummies_recent_first, double alpha);

/// Weights derived from filings of `filing_year`, effective the following
/// calendar year. AII: equal weights over firms whose `filing_year` record
/// has dummy = true. SAII: the same constituents weighted by score. TAII:
/// firms with positive discounted engagement, weighted by it.
/// Throws ComputationError when no firm qualifies, or for SAII when every
/// qualifying score is zero.
WeightVector compute_weights(const IndexSpec& spec, const std::vector<AiScoreRecord>& records,
                             int filing_year);

/// Chains levels over `calendar` (strictly increasing trading dates; the
/// first date is the base row and needs no returns). Weights switch to the
/// year's vector on the first trading day of each calendar year. A
/// constituent with no return on a date is dropped from that date onward and
/// the remaining weights are renormalized; the drop is recorded in warnings.
IndexSeries chain_index(const IndexSpec& spec, const std::vector<WeightVector>& weights_by_year,
                        const std::map<Cik, ReturnSeries>& returns,
                        const std::vector<Date>& calendar);

/// `year,cik,weight` sorted by (year, cik), 12 significant digits.
void write_weights_csv(const std::filesystem::path& path,
                       const std::vector<WeightVector>& weights);

std::vector<WeightVector> read_weights_csv(const std::filesystem::path& path);

/// `date,level,daily_return`; the base row carries daily_return 0.
void write_index_csv(const std::filesystem::path& path, const IndexSeries& series);

}  // namespace aidx::index
