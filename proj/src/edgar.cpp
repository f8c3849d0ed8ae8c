#include "aidx/edgar.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "aidx/errors.hpp"

namespace aidx::edgar {

namespace {

using json = nlohmann::json;

class RateLimiter {
public:
    explicit RateLimiter(double per_second)
        : interval_(per_second > 0.0 ? 1.0 / per_second : 0.0) {}

    void wait() {
        using clock = std::chrono::steady_clock;
        auto now = clock::now();
        if (has_last_) {
            auto min_gap = std::chrono::duration<double>(interval_);
            auto next = last_ + std::chrono::duration_cast<clock::duration>(min_gap);
            if (now < next) {
                std::this_thread::sleep_for(next - now);
                now = clock::now();
            }
        }
        last_ = now;
        has_last_ = true;
    }

private:
    double interval_;
    bool has_last_ = false;
    std::chrono::steady_clock::time_point last_;
};

std::string get_with_retries(httplib::Client& client, const std::string& path,
                             const FetchConfig& config, RateLimiter& limiter,
                             const std::string& what) {
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        limiter.wait();
        auto res = client.Get(path);
        if (res && res->status == 200) return res->body;
        if (res && res->status == 404)
            throw DataError("corpus", "fetch error: " + what + " not found (404)");
        if (attempt < config.max_retries)
            std::this_thread::sleep_for(std::chrono::milliseconds(50 * (attempt + 1)));
    }
    throw DataError("corpus", "fetch error: " + what + " unreachable after " +
                                  std::to_string(config.max_retries + 1) + " attempts");
}

std::string strip_dashes(std::string s) {
    s.erase(std::remove(s.begin(), s.end(), '-'), s.end());
    return s;
}

}  // namespace

std::vector<Filing> fetch_filings(const Cik& cik, const YearRange& years,
                                  const FetchConfig& config, const CorpusPaths& paths) {
    if (years.empty()) return {};
    if (config.user_agent.empty())
        throw UsageError("corpus", "fetching requires an identifying user agent");

    httplib::Client client(config.base_url);
    client.set_connection_timeout(config.timeout_seconds);
    client.set_read_timeout(config.timeout_seconds);
    client.set_default_headers({{"User-Agent", config.user_agent}});
    RateLimiter limiter(config.max_requests_per_second);

    const std::string index_path = "/submissions/CIK" + cik.value + ".json";
    std::string body = get_with_retries(client, index_path, config, limiter,
                                        "filing index for CIK " + cik.value);
    json index;
    try {
        index = json::parse(body);
    } catch (const json::exception& e) {
        throw DataError("corpus", std::string("fetch error: bad filing index JSON: ") + e.what());
    }

    std::vector<Filing> filings;
    std::vector<corpus::ManifestRow> manifest;
    try {
        manifest = corpus::read_manifest(paths);
    } catch (const DataError&) {
        // fresh corpus
    }

    const auto& recent = index.at("filings").at("recent");
    const auto& forms = recent.at("form");
    const auto& dates = recent.at("filingDate");
    const auto& accessions = recent.at("accessionNumber");
    const auto& documents = recent.at("primaryDocument");

    for (std::size_t i = 0; i < forms.size(); ++i) {
        if (forms[i].get<std::string>() != "10-K") continue;
        Date filed = Date::parse(dates[i].get<std::string>());
        if (!years.contains(filed.year)) continue;

        const std::string accession = accessions[i].get<std::string>();
        const std::string document = documents[i].get<std::string>();
        const std::string cik_number = std::to_string(std::stoll(cik.value));
        const std::string doc_path = "/Archives/edgar/data/" + cik_number + "/" +
                                     strip_dashes(accession) + "/" + document;
        std::string raw = get_with_retries(client, doc_path, config, limiter,
                                           "document " + accession);

        Filing filing;
        filing.cik = cik;
        filing.filing_year = filed.year;
        filing.accession_id = accession;
        filing.text = corpus::clean_filing_text(raw).text;
        filing.source_uri = config.base_url + doc_path;
        auto row = corpus::persist_filing(paths, filing);

        // Replace any previous manifest row for this company-year.
        manifest.erase(std::remove_if(manifest.begin(), manifest.end(),
                                      [&](const corpus::ManifestRow& m) {
                                          return m.cik == cik && m.year == filed.year;
                                      }),
                       manifest.end());
        manifest.push_back(row);
        filings.push_back(std::move(filing));
    }
    corpus::write_manifest(paths, std::move(manifest));
    std::sort(filings.begin(), filings.end(), [](const Filing& a, const Filing& b) {
        return a.filing_year < b.filing_year;
    });
    return filings;
}

}  // namespace aidx::edgar
