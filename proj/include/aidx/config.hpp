#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "aidx/dates.hpp"

namespace aidx::pipeline {

/// Pipeline settings. Precedence is CLI flags > config file > these
/// defaults; the config file is flat `key = value` lines with '#' comments.
struct PipelineConfig {
    std::filesystem::path corpus_dir = "corpus";
    std::filesystem::path raw_dir;                  // offline ingest source
    std::filesystem::path prices_path = "prices.csv";
    std::filesystem::path riskfree_path = "riskfree.csv";
    std::filesystem::path universe_path = "universe.csv";
    std::filesystem::path etf_reference_path = "etf_reference.csv";
    std::filesystem::path out_dir = "out";

    std::string market_ticker = "SPX";        // event-study reference market
    std::string benchmark_ticker = "IXIC";    // performance-panel benchmark
    std::string index_specs = "aii,saii,taii05,taii5x";  // schemes to build
    std::string keywords;                      // optional keyword-set override
    std::string normalization = "length";      // "length" or "maxfreq"
    std::string downside_threshold = "zero";   // "zero" or "rf"

    Date event_date{2022, 11, 30};
    int estimation_length = 251;
    int event_length = 61;

    std::string split_scheme;  // optional event-study group split, e.g. "taii05"
    int split_year = 0;

    int year_min = 2010;
    int year_max = 2023;
    double base_level = 100.0;
    std::uint64_t seed = 42;
    bool offline = true;

    std::string edgar_base_url = "https://www.sec.gov";
    std::string edgar_user_agent;  // or the AIDX_EDGAR_USER_AGENT env var
    std::string fetch_cik;         // company to fetch when ingesting online
};

/// Reads `key = value` pairs over `base`. Unknown keys are a usage error.
PipelineConfig load_config_file(const std::filesystem::path& path, PipelineConfig base = {});

}  // namespace aidx::pipeline
