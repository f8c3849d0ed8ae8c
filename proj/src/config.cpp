#include "aidx/config.hpp"

#include <fstream>

#include "aidx/csv.hpp"
#include "aidx/errors.hpp"

namespace aidx::pipeline {

namespace {

std::string trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return std::string(s);
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw UsageError("config", "boolean expected for '" + key + "', got '" + v + "'");
}

}  // namespace

PipelineConfig load_config_file(const std::filesystem::path& path, PipelineConfig base) {
    std::ifstream in(path);
    if (!in) throw UsageError("config", "cannot open config file " + path.string());
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw UsageError("config", "line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(stripped.substr(0, eq));
        std::string value = trim(stripped.substr(eq + 1));
        std::string where = "config key '" + key + "'";

        if (key == "corpus_dir") base.corpus_dir = value;
        else if (key == "raw_dir") base.raw_dir = value;
        else if (key == "prices") base.prices_path = value;
        else if (key == "riskfree") base.riskfree_path = value;
        else if (key == "universe") base.universe_path = value;
        else if (key == "etf_reference") base.etf_reference_path = value;
        else if (key == "out_dir") base.out_dir = value;
        else if (key == "market_ticker") base.market_ticker = value;
        else if (key == "benchmark_ticker") base.benchmark_ticker = value;
        else if (key == "index_specs") base.index_specs = value;
        else if (key == "keywords") base.keywords = value;
        else if (key == "normalization") base.normalization = value;
        else if (key == "downside_threshold") base.downside_threshold = value;
        else if (key == "event_date") base.event_date = Date::parse(value);
        else if (key == "estimation_length") base.estimation_length = static_cast<int>(csv::parse_long(value, where));
        else if (key == "event_length") base.event_length = static_cast<int>(csv::parse_long(value, where));
        else if (key == "split_scheme") base.split_scheme = value;
        else if (key == "split_year") base.split_year = static_cast<int>(csv::parse_long(value, where));
        else if (key == "year_min") base.year_min = static_cast<int>(csv::parse_long(value, where));
        else if (key == "year_max") base.year_max = static_cast<int>(csv::parse_long(value, where));
        else if (key == "base_level") base.base_level = csv::parse_double(value, where);
        else if (key == "seed") base.seed = static_cast<std::uint64_t>(csv::parse_long(value, where));
        else if (key == "offline") base.offline = parse_bool(value, key);
        else if (key == "edgar_base_url") base.edgar_base_url = value;
        else if (key == "edgar_user_agent") base.edgar_user_agent = value;
        else if (key == "fetch_cik") base.fetch_cik = value;
        else throw UsageError("config", "unknown key '" + key + "'");
    }
    return base;
}

}  // namespace aidx::pipeline
