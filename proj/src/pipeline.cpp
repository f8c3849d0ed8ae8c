#include "aidx/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "aidx/csv.hpp"
#include "aidx/edgar.hpp"
#include "aidx/errors.hpp"
#include "aidx/eventstudy.hpp"
#include "aidx/perf.hpp"
#include "aidx/regress.hpp"
#include "aidx/textscore.hpp"

namespace aidx::pipeline {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::map<std::string, corpus::Cik> load_universe(const fs::path& path) {
    auto rows = csv::read_file(path);
    if (rows.empty() || rows.front().size() != 2 || rows.front()[0] != "ticker" ||
        rows.front()[1] != "cik")
        throw DataError("cli", "universe file header must be ticker,cik: " + path.string());
    std::map<std::string, corpus::Cik> out;
    for (std::size_t r = 1; r < rows.size(); ++r)
        out[rows[r][0]] = corpus::canonicalize_cik(rows[r][1]);
    return out;
}

std::vector<index::IndexSpec> configured_index_specs(const PipelineConfig& config) {
    using index::Scheme;
    std::vector<index::IndexSpec> specs;
    std::string_view list = config.index_specs;
    std::size_t start = 0;
    while (start <= list.size()) {
        std::size_t end = list.find(',', start);
        if (end == std::string_view::npos) end = list.size();
        std::string name(list.substr(start, end - start));
        if (!name.empty()) {
            if (name == "aii") specs.push_back({Scheme::AII, 0.0, config.base_level});
            else if (name == "saii") specs.push_back({Scheme::SAII, 0.0, config.base_level});
            else if (name == "taii05") specs.push_back({Scheme::TAII, 0.5, config.base_level});
            else if (name == "taii5x") specs.push_back({Scheme::TAII, 5.0, config.base_level});
            else if (name.rfind("taii", 0) == 0)
                specs.push_back({Scheme::TAII, csv::parse_double(name.substr(4), "index_specs"),
                                 config.base_level});
            else throw UsageError("cli", "unknown index scheme '" + name + "'");
        }
        if (end == list.size()) break;
        start = end + 1;
    }
    if (specs.empty()) throw UsageError("cli", "index_specs is empty");
    return specs;
}

namespace {

textscore::KeywordSet keyword_set(const PipelineConfig& config) {
    return config.keywords.empty() ? textscore::KeywordSet::default_set()
                                   : textscore::KeywordSet::parse(config.keywords);
}

std::string read_file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cli", "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Price dates of one ticker straight from the CSV (the return series drops
// the first bar, but index chaining needs it as the base row).
std::vector<Date> price_dates(const fs::path& prices_path, const std::string& ticker) {
    auto rows = csv::read_file(prices_path);
    std::vector<Date> dates;
    for (std::size_t r = 1; r < rows.size(); ++r)
        if (rows[r].size() >= 2 && rows[r][1] == ticker) dates.push_back(Date::parse(rows[r][0]));
    return dates;
}

void write_json(const fs::path& path, const ordered_json& doc) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cli", "cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

}  // namespace

void run_ingest(const PipelineConfig& config) {
    corpus::CorpusPaths paths{config.corpus_dir};
    std::vector<corpus::ManifestRow> manifest;
    try {
        manifest = corpus::read_manifest(paths);
    } catch (const DataError&) {
        // no corpus yet
    }

    bool did_anything = false;
    if (!config.raw_dir.empty()) {
        if (!fs::is_directory(config.raw_dir))
            throw DataError("corpus", "raw directory not found: " + config.raw_dir.string());
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(config.raw_dir))
            if (entry.is_regular_file()) files.push_back(entry.path());
        std::sort(files.begin(), files.end());

        for (const auto& file : files) {
            // <cik>_<year>_<accession>.<ext>
            std::string stem = file.stem().string();
            auto first = stem.find('_');
            auto second = stem.find('_', first + 1);
            if (first == std::string::npos || second == std::string::npos)
                throw DataError("corpus",
                                "raw filename must be <cik>_<year>_<accession>: " + file.string());
            corpus::Filing filing;
            filing.cik = corpus::canonicalize_cik(stem.substr(0, first));
            filing.filing_year = static_cast<int>(
                csv::parse_long(stem.substr(first + 1, second - first - 1), file.string()));
            filing.accession_id = stem.substr(second + 1);
            if (filing.filing_year < config.year_min || filing.filing_year > config.year_max)
                throw DataError("corpus", "filing year " + std::to_string(filing.filing_year) +
                                              " outside sample range in " + file.string());
            auto cleaned = corpus::clean_filing_text(read_file_bytes(file));
            if (cleaned.replaced_bytes > 0)
                std::fprintf(stderr, "warning: %zu undecodable bytes replaced in %s\n",
                             cleaned.replaced_bytes, file.filename().string().c_str());
            filing.text = std::move(cleaned.text);
            filing.source_uri = "file:" + file.filename().string();
            auto row = corpus::persist_filing(paths, filing);
            manifest.erase(std::remove_if(manifest.begin(), manifest.end(),
                                          [&](const corpus::ManifestRow& m) {
                                              return m.cik == filing.cik &&
                                                     m.year == filing.filing_year;
                                          }),
                           manifest.end());
            manifest.push_back(row);
            did_anything = true;
        }
        corpus::write_manifest(paths, manifest);
    }

    if (!config.fetch_cik.empty()) {
        if (config.offline)
            throw UsageError("corpus", "fetch requested but the pipeline is offline");
        edgar::FetchConfig fetch;
        fetch.base_url = config.edgar_base_url;
        fetch.user_agent = config.edgar_user_agent;
        if (fetch.user_agent.empty())
            if (const char* env = std::getenv("AIDX_EDGAR_USER_AGENT")) fetch.user_agent = env;
        edgar::fetch_filings(corpus::canonicalize_cik(config.fetch_cik),
                             {config.year_min, config.year_max}, fetch, paths);
        did_anything = true;
    }

    if (!did_anything)
        throw UsageError("corpus", "ingest needs a raw_dir or a fetch_cik");
}

void run_score(const PipelineConfig& config) {
    corpus::CorpusPaths paths{config.corpus_dir};
    auto filings = corpus::load_corpus(paths);
    if (filings.empty()) throw DataError("textscore", "corpus is empty");

    std::map<int, std::vector<textscore::TokenizedDoc>> by_year;
    for (const auto& filing : filings)
        by_year[filing.filing_year].push_back(
            textscore::tokenize(filing.text, filing.cik, filing.filing_year));

    auto kw = keyword_set(config);
    auto norm = config.normalization == "maxfreq" ? textscore::ScoreNormalization::ByMaxWordFreq
                                                  : textscore::ScoreNormalization::ByLength;
    std::vector<textscore::AiScoreRecord> records;
    for (const auto& [year, docs] : by_year) {
        auto year_records = textscore::score_year(docs, kw, norm);
        records.insert(records.end(), year_records.begin(), year_records.end());
    }

    fs::create_directories(config.out_dir);
    textscore::write_scores_csv(config.out_dir / "scores.csv", records);
    textscore::write_mentions_csv(config.out_dir / "mentions.csv",
                                  textscore::mentions_per_year(records));
}

void run_build_index(const PipelineConfig& config) {
    auto records = textscore::read_scores_csv(config.out_dir / "scores.csv");
    auto universe = load_universe(config.universe_path);
    auto prices = corpus::load_prices(config.prices_path);

    std::map<corpus::Cik, corpus::ReturnSeries> returns_by_cik;
    for (const auto& [ticker, cik] : universe) {
        auto it = prices.find(ticker);
        if (it != prices.end()) returns_by_cik[cik] = it->second;
    }

    std::set<int> filing_years;
    for (const auto& rec : records) filing_years.insert(rec.filing_year);
    if (filing_years.empty()) throw DataError("index", "scores file has no records");

    fs::create_directories(config.out_dir);
    auto market_dates = price_dates(config.prices_path, config.market_ticker);
    if (market_dates.empty())
        throw DataError("index", "market ticker " + config.market_ticker + " not in price file");

    for (const auto& spec : configured_index_specs(config)) {
        std::vector<index::WeightVector> weights;
        for (int year : filing_years) weights.push_back(index::compute_weights(spec, records, year));
        write_weights_csv(config.out_dir / ("weights_" + spec.name() + ".csv"), weights);

        int first_year = weights.front().effective_year;
        int last_year = weights.back().effective_year;
        std::vector<Date> calendar;
        for (const Date& d : market_dates)
            if (d.year >= first_year && d.year <= last_year) calendar.push_back(d);
        auto series = index::chain_index(spec, weights, returns_by_cik, calendar);
        write_index_csv(config.out_dir / ("index_" + spec.name() + ".csv"), series);
    }
}

void run_event_study(const PipelineConfig& config) {
    auto universe = load_universe(config.universe_path);
    auto prices = corpus::load_prices(config.prices_path);

    auto market_it = prices.find(config.market_ticker);
    if (market_it == prices.end())
        throw DataError("eventstudy", "market ticker " + config.market_ticker + " not in price file");

    eventstudy::EventWindowSpec spec;
    spec.event_date = config.event_date;
    spec.estimation_length = config.estimation_length;
    spec.event_length = config.event_length;
    spec.market = market_it->second;

    std::vector<eventstudy::SecurityResult> securities;
    std::vector<std::string> tickers;  // aligned with securities
    std::vector<std::string> skipped;
    for (const auto& [ticker, cik] : universe) {
        auto it = prices.find(ticker);
        if (it == prices.end()) {
            skipped.push_back(ticker + " (no prices)");
            continue;
        }
        try {
            auto fit = eventstudy::fit_market_model(it->second, spec);
            auto ars = eventstudy::abnormal_returns(it->second, fit, spec);
            eventstudy::SecurityResult sec;
            sec.cik = cik;
            sec.ars = std::move(ars);
            for (const auto& pt : sec.ars) sec.car += pt.ar;
            securities.push_back(std::move(sec));
            tickers.push_back(ticker);
        } catch (const ComputationError& e) {
            skipped.push_back(ticker + " (" + e.what() + ")");
        }
    }

    auto result = eventstudy::caar(securities, spec.event_length);

    ordered_json doc;
    doc["spec"] = {{"event_date", config.event_date.str()},
                   {"estimation_length", spec.estimation_length},
                   {"event_length", spec.event_length},
                   {"market", config.market_ticker}};
    doc["n"] = result.n;
    doc["per_security"] = ordered_json::array();
    for (std::size_t i = 0; i < securities.size(); ++i) {
        const auto& sec = securities[i];
        ordered_json ars = ordered_json::array();
        std::vector<ordered_json> dense(static_cast<std::size_t>(spec.event_length),
                                        ordered_json(nullptr));
        for (const auto& pt : sec.ars) dense[static_cast<std::size_t>(pt.day)] = pt.ar;
        for (auto& v : dense) ars.push_back(std::move(v));
        doc["per_security"].push_back({{"cik", sec.cik.value},
                                       {"ticker", tickers[i]},
                                       {"car", sec.car},
                                       {"ar_per_day", sec.car / spec.event_length},
                                       {"ar", std::move(ars)}});
    }
    doc["caar_path"] = result.caar_path;
    doc["caar"] = result.caar_path.back();
    doc["caar_per_day"] = result.caar_path.back() / spec.event_length;
    doc["t_stat"] = result.t_stat;
    doc["zero_variance"] = result.zero_variance;
    doc["wilcoxon_z"] = result.wilcoxon.z;
    doc["wilcoxon_p"] = result.wilcoxon.p;
    doc["wilcoxon_defined"] = result.wilcoxon.defined;
    doc["wilcoxon_exact"] = result.wilcoxon.exact;
    doc["skipped"] = skipped;

    if (!config.split_scheme.empty()) {
        auto weights = index::read_weights_csv(
            config.out_dir / ("weights_" + config.split_scheme + ".csv"));
        const index::WeightVector* split = nullptr;
        for (const auto& wv : weights)
            if (wv.effective_year == config.split_year) split = &wv;
        if (split == nullptr)
            throw DataError("eventstudy", "no " + config.split_scheme + " weights for year " +
                                              std::to_string(config.split_year));
        std::vector<double> cars_in, cars_out;
        for (const auto& sec : securities) {
            auto it = split->entries.find(sec.cik);
            (it != split->entries.end() && it->second > 0.0 ? cars_in : cars_out)
                .push_back(sec.car);
        }
        auto cmp = eventstudy::two_sample_t(cars_in, cars_out);
        doc["group_comparison"] = {{"scheme", config.split_scheme},
                                   {"year", config.split_year},
                                   {"n_in", cars_in.size()},
                                   {"n_out", cars_out.size()},
                                   {"mean_in", cmp.mean_a},
                                   {"mean_out", cmp.mean_b},
                                   {"difference", cmp.difference},
                                   {"t", cmp.t},
                                   {"df", cmp.df},
                                   {"p", cmp.p}};
    }

    fs::create_directories(config.out_dir);
    write_json(config.out_dir / "event_study.json", doc);

    // Plot-ready CAAR path with the 95% confidence band.
    std::ofstream caar_csv(config.out_dir / "caar.csv", std::ios::binary | std::ios::trunc);
    if (!caar_csv) throw DataError("eventstudy", "cannot write caar.csv");
    caar_csv << "day,caar,ci_low,ci_high\n";
    for (std::size_t k = 0; k < result.caar_path.size(); ++k) {
        double half = 1.96 * result.se_path[k];
        caar_csv << k << ',' << csv::format_g12(result.caar_path[k]) << ','
                 << csv::format_g12(result.caar_path[k] - half) << ','
                 << csv::format_g12(result.caar_path[k] + half) << '\n';
    }
}

void run_regress(const PipelineConfig& config) {
    if (config.split_scheme.empty() || config.split_year == 0)
        throw UsageError("regress", "regress needs split_scheme and split_year (the index weight "
                                    "used as regressor)");

    std::ifstream in(config.out_dir / "event_study.json");
    if (!in) throw DataError("regress", "event_study.json not found; run event-study first");
    ordered_json report = ordered_json::parse(in);

    auto weights =
        index::read_weights_csv(config.out_dir / ("weights_" + config.split_scheme + ".csv"));
    const index::WeightVector* wv = nullptr;
    for (const auto& w : weights)
        if (w.effective_year == config.split_year) wv = &w;
    if (wv == nullptr)
        throw DataError("regress", "no " + config.split_scheme + " weights for year " +
                                       std::to_string(config.split_year));

    const auto& per_security = report.at("per_security");
    const auto n = static_cast<Eigen::Index>(per_security.size());
    Eigen::VectorXd y(n);
    Eigen::MatrixXd x(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& sec = per_security[static_cast<std::size_t>(i)];
        y(i) = sec.at("car").get<double>();
        corpus::Cik cik = corpus::canonicalize_cik(sec.at("cik").get<std::string>());
        auto it = wv->entries.find(cik);
        x(i, 0) = 1.0;
        x(i, 1) = it != wv->entries.end() ? it->second : 0.0;
    }

    std::string weight_name = config.split_scheme + "_" + std::to_string(config.split_year);
    std::vector<std::string> names = {"const", weight_name};
    regress::MmOptions options;
    options.seed = config.seed;
    auto fits = {regress::ols(y, x, names), regress::mm_fit(y, x, names, options)};

    ordered_json doc;
    doc["model"] = weight_name;
    doc["fits"] = ordered_json::array();
    for (const auto& fit : fits) {
        ordered_json jfit;
        jfit["method"] = fit.method;
        jfit["coefficients"] = ordered_json::array();
        for (const auto& c : fit.coefficients)
            jfit["coefficients"].push_back(
                {{"name", c.name}, {"estimate", c.estimate}, {"se", c.std_error}, {"p", c.p_value}});
        jfit["r2"] = fit.r_squared;
        jfit["n"] = fit.n_obs;
        jfit["converged"] = fit.converged;
        jfit["seed"] = fit.seed;
        doc["fits"].push_back(std::move(jfit));
    }
    fs::create_directories(config.out_dir);
    write_json(config.out_dir / ("regress_" + weight_name + ".json"), doc);
}

void run_report(const PipelineConfig& config) {
    auto prices = corpus::load_prices(config.prices_path);
    auto rf = corpus::load_risk_free(config.riskfree_path);
    auto reference = perf::load_etf_reference(config.etf_reference_path);

    auto bench_it = prices.find(config.benchmark_ticker);
    if (bench_it == prices.end())
        throw DataError("perf", "benchmark ticker " + config.benchmark_ticker + " not in price file");
    const corpus::ReturnSeries& benchmark = bench_it->second;

    auto threshold = config.downside_threshold == "rf" ? perf::DownsideThreshold::RiskFree
                                                       : perf::DownsideThreshold::Zero;

    std::vector<perf::PerfMetrics> panel;

    // Index rows from the chained level files, as log returns.
    for (const auto& spec : configured_index_specs(config)) {
        fs::path file = config.out_dir / ("index_" + spec.name() + ".csv");
        auto rows = csv::read_file(file);
        corpus::ReturnSeries series;
        std::string name = spec.name();
        std::transform(name.begin(), name.end(), name.begin(), ::toupper);
        series.ticker = name;
        double prev = 0.0;
        for (std::size_t r = 1; r < rows.size(); ++r) {
            double level = csv::parse_double(rows[r][1], file.string());
            if (r > 1)
                series.observations.push_back({Date::parse(rows[r][0]), std::log(level / prev)});
            prev = level;
        }
        panel.push_back(perf::metrics_row(series, &benchmark, rf, threshold));
    }

    // ETF rows for reference funds present in the price file.
    std::vector<std::string> etf_tickers;
    for (const auto& ref : reference)
        if (prices.count(ref.ticker)) etf_tickers.push_back(ref.ticker);
    std::sort(etf_tickers.begin(), etf_tickers.end());
    for (const auto& ticker : etf_tickers)
        panel.push_back(perf::metrics_row(prices.at(ticker), &benchmark, rf, threshold));

    // Benchmark row last, without alpha/beta against itself.
    panel.push_back(perf::metrics_row(benchmark, nullptr, rf, threshold));

    fs::create_directories(config.out_dir);
    perf::write_panel_csv(config.out_dir / "panel.csv", panel);

    std::map<std::string, corpus::ReturnSeries> etf_returns;
    for (const auto& t : etf_tickers) etf_returns[t] = prices.at(t);
    perf::write_expense_scatter_csv(config.out_dir / "scatter.csv", reference, etf_returns);
}

}  // namespace aidx::pipeline
