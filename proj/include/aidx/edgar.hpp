#pragma once

#include <string>
#include <vector>

#include "aidx/corpus.hpp"

namespace aidx::edgar {

using corpus::Cik;
using corpus::CorpusPaths;
using corpus::Filing;

/// Client settings. `base_url` points at an EDGAR-shaped host: the filing
/// list lives at /submissions/CIK<cik>.json and documents under
/// /Archives/edgar/data/<cik-number>/<accession-without-dashes>/<document>.
/// EDGAR fair use requires an identifying user agent and at most 10
/// requests per second; the client enforces both.
struct FetchConfig {
    std::string base_url;        // e.g. "https://www.sec.gov"
    std::string user_agent;      // mandatory, e.g. "name contact@example.com"
    int max_retries = 3;
    double max_requests_per_second = 10.0;
    int timeout_seconds = 30;
};

struct YearRange {
    int first = 0;
    int last = -1;  // empty when last < first

    bool contains(int year) const { return year >= first && year <= last; }
    bool empty() const { return last < first; }
};

/// Downloads the annual 10-K filings of one company for the year range,
/// cleans them, and persists them into the corpus layout. Returns the
/// persisted filings (one per year found; missing years are simply absent).
/// Re-fetching overwrites identical content. Throws DataError after bounded
/// retries when the endpoint cannot be reached.
std::vector<Filing> fetch_filings(const Cik& cik, const YearRange& years,
                                  const FetchConfig& config, const CorpusPaths& paths);

}  // namespace aidx::edgar
