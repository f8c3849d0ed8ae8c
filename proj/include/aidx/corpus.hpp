#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aidx/dates.hpp"

namespace aidx::corpus {

/// SEC Central Index Key, canonical 10-digit zero-padded form.
struct Cik {
    std::string value;
    auto operator<=>(const Cik&) const = default;
};

/// One company-year 10-K document, already cleaned to plain text.
struct Filing {
    Cik cik;
    int filing_year = 0;
    std::string accession_id;
    std::string text;
    std::string source_uri;
};

struct PriceBar {
    Date date;
    std::string ticker;
    double close = 0.0;
    std::optional<double> market_cap;
};

struct ReturnObs {
    Date date;
    double log_return = 0.0;
};

/// Dated daily log returns for one security or index.
struct ReturnSeries {
    std::string ticker;
    std::vector<ReturnObs> observations;
};

struct RiskFreeObs {
    Date date;
    double annualized_yield = 0.0;  // decimal fraction per year, 0.05 = 5%
};

struct RiskFreeCurve {
    std::vector<RiskFreeObs> observations;

    /// Daily rate for `date`: latest observation on or before it, divided
    /// by 252. Throws DataError when the curve starts after `date`.
    double daily_rate(const Date& date) const;
};

/// Zero-pads a numeric identifier to the canonical 10-character CIK.
/// Throws DataError for non-numeric input or more than 10 digits.
Cik canonicalize_cik(std::string_view raw);
Cik canonicalize_cik(std::uint64_t raw);

struct CleanedText {
    std::string text;
    std::size_t replaced_bytes = 0;  // invalid UTF-8 bytes replaced by U+FFFD
};

/// Converts an HTML/SGML (or plain-text) document to plain text:
/// tags are dropped (block-level tags and <br> separate words, inline tags
/// do not; script/style bodies are skipped), character entities are decoded,
/// and whitespace runs collapse to single spaces. Invalid UTF-8 bytes are
/// replaced with U+FFFD and counted instead of failing.
CleanedText clean_filing_text(std::string_view raw);

/// Loads the price CSV (`date,ticker,close[,market_cap]`) into per-ticker
/// log-return series; the first bar of each ticker has no prior close and is
/// dropped. Row numbers in errors are 1-based including the header.
std::map<std::string, ReturnSeries> load_prices(const std::filesystem::path& csv_path);

/// Loads the risk-free CSV (`date,annualized_yield`).
RiskFreeCurve load_risk_free(const std::filesystem::path& csv_path);

/// On-disk corpus layout: `filings/<cik>/<year>.txt` plus `manifest.csv`.
struct CorpusPaths {
    std::filesystem::path root;

    std::filesystem::path filing_path(const Cik& cik, int year) const;
    std::filesystem::path manifest_path() const;
};

struct ManifestRow {
    Cik cik;
    int year = 0;
    std::string accession_id;
    std::string source_uri;
    std::string sha256;
};

/// Writes the filing text (verbatim bytes) into the layout and returns the
/// manifest row for it. Overwrites any previous content for (cik, year).
ManifestRow persist_filing(const CorpusPaths& paths, const Filing& filing);

/// Rewrites manifest.csv sorted by (cik, year).
void write_manifest(const CorpusPaths& paths, std::vector<ManifestRow> rows);

std::vector<ManifestRow> read_manifest(const CorpusPaths& paths);

/// Loads one filing back from the layout (byte-identical to what was persisted).
Filing load_filing(const CorpusPaths& paths, const ManifestRow& row);

/// Loads every filing listed in the manifest, in manifest order.
std::vector<Filing> load_corpus(const CorpusPaths& paths);

}  // namespace aidx::corpus
