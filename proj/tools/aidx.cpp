#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "aidx/errors.hpp"
#include "aidx/pipeline.hpp"

namespace {

using aidx::pipeline::PipelineConfig;

// Finds --config before anything else so flags given on the command line
// override values from the file.
PipelineConfig preload_config(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--config") return aidx::pipeline::load_config_file(argv[i + 1]);
        if (arg.rfind("--config=", 0) == 0)
            return aidx::pipeline::load_config_file(arg.substr(9));
    }
    return {};
}

void add_common_options(CLI::App* cmd, PipelineConfig& config) {
    cmd->add_option("--config", "config file (flat key = value)")->expected(1);
    cmd->add_option("--corpus-dir", config.corpus_dir, "corpus directory");
    cmd->add_option("--prices", config.prices_path, "price CSV (date,ticker,close[,market_cap])");
    cmd->add_option("--riskfree", config.riskfree_path, "risk-free CSV (date,annualized_yield)");
    cmd->add_option("--universe", config.universe_path, "ticker,cik mapping CSV");
    cmd->add_option("--etf-reference", config.etf_reference_path, "ETF reference table CSV");
    cmd->add_option("--out-dir", config.out_dir, "artifact output directory");
    cmd->add_option("--seed", config.seed, "random seed for seeded estimators");
    cmd->add_flag("--offline,!--online", config.offline, "disable network fetching");
    cmd->add_option("--event-date", [&config](const std::vector<std::string>& vals) {
        config.event_date = aidx::Date::parse(vals.front());
        return true;
    }, "event day zero anchor (YYYY-MM-DD)")->expected(1);
    cmd->add_option("--estimation-length", config.estimation_length, "estimation window days");
    cmd->add_option("--event-length", config.event_length, "event window days");
    cmd->add_option("--market-ticker", config.market_ticker, "reference market ticker");
    cmd->add_option("--benchmark-ticker", config.benchmark_ticker, "performance benchmark ticker");
    cmd->add_option("--index-specs", config.index_specs,
                    "index schemes to build (default aii,saii,taii05,taii5x)");
    cmd->add_option("--keywords", config.keywords,
                    "keyword rules, ';'-separated, trailing '*' = prefix");
    cmd->add_option("--normalize", config.normalization, "score normalization: length|maxfreq");
    cmd->add_option("--downside-threshold", config.downside_threshold,
                    "sortino downside cutoff: zero|rf");
    cmd->add_option("--split-scheme", config.split_scheme,
                    "index scheme for group splits / regression weights");
    cmd->add_option("--split-year", config.split_year, "effective year for --split-scheme");
    cmd->add_option("--year-min", config.year_min, "first sample year");
    cmd->add_option("--year-max", config.year_max, "last sample year");
    cmd->add_option("--base-level", config.base_level, "index base level");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AI disclosure scoring, index construction and evaluation"};
    app.require_subcommand(1);

    PipelineConfig config;
    try {
        config = preload_config(argc, argv);
    } catch (const aidx::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }

    auto* ingest = app.add_subcommand("ingest", "fetch or import filings into the corpus");
    ingest->add_option("--raw-dir", config.raw_dir, "directory of raw filing documents");
    ingest->add_option("--fetch-cik", config.fetch_cik, "company to fetch from EDGAR");
    ingest->add_option("--edgar-base-url", config.edgar_base_url, "EDGAR endpoint");
    ingest->add_option("--edgar-user-agent", config.edgar_user_agent,
                       "identifying user agent (or AIDX_EDGAR_USER_AGENT)");
    add_common_options(ingest, config);

    auto* score = app.add_subcommand("score", "compute AI scores and per-year mention counts");
    add_common_options(score, config);

    auto* build = app.add_subcommand("build-index", "compute weights and chain the four indices");
    add_common_options(build, config);

    auto* event = app.add_subcommand("event-study", "market-model event study over the universe");
    add_common_options(event, config);

    auto* reg = app.add_subcommand("regress", "regress CARs on index weights (OLS and MM)");
    add_common_options(reg, config);

    auto* report = app.add_subcommand("report", "performance panel and expense scatter");
    add_common_options(report, config);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 1;
    }

    try {
        if (ingest->parsed()) aidx::pipeline::run_ingest(config);
        else if (score->parsed()) aidx::pipeline::run_score(config);
        else if (build->parsed()) aidx::pipeline::run_build_index(config);
        else if (event->parsed()) aidx::pipeline::run_event_study(config);
        else if (reg->parsed()) aidx::pipeline::run_regress(config);
        else if (report->parsed()) aidx::pipeline::run_report(config);
    } catch (const aidx::UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const aidx::DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const aidx::ComputationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: internal: %s\n", e.what());
        return 3;
    }
    return 0;
}
