#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "aidx/csv.hpp"
#include "aidx/edgar.hpp"
#include "aidx/errors.hpp"
#include "aidx/pipeline.hpp"
#include "aidx/sha256.hpp"
#include "aidx/textscore.hpp"
#include "test_util.hpp"

using namespace aidx;
using namespace aidx::pipeline;
using testutil::TempDir;

namespace {

PipelineConfig fixture_config(const std::filesystem::path& workdir) {
    PipelineConfig config;
    config.corpus_dir = workdir / "corpus";
    config.raw_dir = testutil::data_dir() / "fixtures" / "raw";
    config.prices_path = testutil::data_dir() / "fixtures" / "prices.csv";
    config.riskfree_path = testutil::data_dir() / "fixtures" / "riskfree.csv";
    config.universe_path = testutil::data_dir() / "fixtures" / "universe.csv";
    config.etf_reference_path = testutil::data_dir() / "etf_reference.csv";
    config.out_dir = workdir / "out";
    config.split_scheme = "taii05";
    config.split_year = 2023;
    return config;
}

// date/ints keyed lookup of a numeric CSV column
std::map<std::string, double> column_by_key(const std::filesystem::path& path, std::size_t key_a,
                                            std::size_t key_b, std::size_t value) {
    std::map<std::string, double> out;
    auto rows = csv::read_file(path);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        std::string key = rows[r][key_a];
        if (key_b != key_a) key += "|" + rows[r][key_b];
        out[key] = csv::parse_double(rows[r][value], path.string());
    }
    return out;
}

}  // namespace

TEST_CASE("ingest reproduces the independent cleaner byte for byte") {
    TempDir dir("ingest");
    auto config = fixture_config(dir.path());
    run_ingest(config);

    corpus::CorpusPaths paths{config.corpus_dir};
    auto manifest = corpus::read_manifest(paths);
    REQUIRE(manifest.size() == 10);

    auto expected = csv::read_file(testutil::oracle_dir() / "expected" / "corpus_sha.csv");
    REQUIRE(expected.size() == 11);
    for (std::size_t r = 1; r < expected.size(); ++r) {
        const auto& row = expected[r];
        const auto& m = manifest[r - 1];
        CHECK(m.cik.value == row[0]);
        CHECK(std::to_string(m.year) == row[1]);
        auto filing = corpus::load_filing(paths, m);
        CHECK(sha256_hex(filing.text) == row[2]);
        CHECK(m.sha256 == row[2]);
    }
}

TEST_CASE("score matches the oracle to 1e-12 and is deterministic") {
    TempDir dir("score");
    auto config = fixture_config(dir.path());
    run_ingest(config);
    run_score(config);

    auto got = column_by_key(config.out_dir / "scores.csv", 0, 1, 5);
    auto want = column_by_key(testutil::oracle_dir() / "expected" / "scores.csv", 0, 1, 5);
    REQUIRE(got.size() == want.size());
    for (const auto& [key, value] : want) {
        REQUIRE(got.count(key) == 1);
        CHECK(std::fabs(got[key] - value) <= 1e-12);
    }

    // integer columns must agree exactly
    auto got_rows = csv::read_file(config.out_dir / "scores.csv");
    auto want_rows = csv::read_file(testutil::oracle_dir() / "expected" / "scores.csv");
    for (std::size_t r = 1; r < want_rows.size(); ++r)
        for (std::size_t c = 0; c < 5; ++c) CHECK(got_rows[r][c] == want_rows[r][c]);

    CHECK(testutil::read_file(config.out_dir / "mentions.csv") ==
          testutil::read_file(testutil::oracle_dir() / "expected" / "mentions.csv"));

    auto first = testutil::read_file(config.out_dir / "scores.csv");
    run_score(config);
    CHECK(testutil::read_file(config.out_dir / "scores.csv") == first);
}

TEST_CASE("fixture filing #3 has max word frequency 57") {
    TempDir dir("mwf");
    auto config = fixture_config(dir.path());
    run_ingest(config);
    run_score(config);
    auto records = textscore::read_scores_csv(config.out_dir / "scores.csv");
    REQUIRE(records.size() == 10);
    CHECK(records[2].cik.value == "0000001002");
    CHECK(records[2].filing_year == 2020);
    CHECK(records[2].max_word_freq == 57);
}

TEST_CASE("build-index matches the oracle weights and levels") {
    TempDir dir("index");
    auto config = fixture_config(dir.path());
    run_ingest(config);
    run_score(config);
    run_build_index(config);

    for (const std::string name : {"aii", "saii", "taii05", "taii5x"}) {
        auto got_w = column_by_key(config.out_dir / ("weights_" + name + ".csv"), 0, 1, 2);
        auto want_w = column_by_key(
            testutil::oracle_dir() / "expected" / ("weights_" + name + ".csv"), 0, 1, 2);
        REQUIRE(got_w.size() == want_w.size());
        for (const auto& [key, value] : want_w) CHECK(std::fabs(got_w[key] - value) <= 1e-12);

        auto got_l = column_by_key(config.out_dir / ("index_" + name + ".csv"), 0, 0, 1);
        auto want_l = column_by_key(
            testutil::oracle_dir() / "expected" / ("index_" + name + ".csv"), 0, 0, 1);
        REQUIRE(got_l.size() == want_l.size());
        for (const auto& [key, value] : want_l) {
            REQUIRE(got_l.count(key) == 1);
            CHECK(got_l[key] == doctest::Approx(value).epsilon(1e-11));
        }
    }
}

TEST_CASE("event study matches the oracle per-security CARs and statistics") {
    TempDir dir("event");
    auto config = fixture_config(dir.path());
    run_ingest(config);
    run_score(config);
    run_build_index(config);
    run_event_study(config);

    std::ifstream in(config.out_dir / "event_study.json");
    auto doc = nlohmann::json::parse(in);

    auto want = csv::read_file(testutil::oracle_dir() / "expected" / "event_security.csv");
    REQUIRE(doc.at("n").get<int>() == static_cast<int>(want.size()) - 1);
    std::map<std::string, double> want_car;
    for (std::size_t r = 1; r < want.size(); ++r)
        want_car[want[r][0]] = csv::parse_double(want[r][4], "car");
    for (const auto& sec : doc.at("per_security")) {
        auto cik = sec.at("cik").get<std::string>();
        REQUIRE(want_car.count(cik) == 1);
        CHECK(std::fabs(sec.at("car").get<double>() - want_car[cik]) <= 1e-9);
    }

    std::ifstream stats_in(testutil::oracle_dir() / "expected" / "event_stats.json");
    auto stats = nlohmann::json::parse(stats_in);
    CHECK(std::fabs(doc.at("t_stat").get<double>() - stats.at("t_stat").get<double>()) <= 1e-9);
    CHECK(std::fabs(doc.at("wilcoxon_z").get<double>() - stats.at("wilcoxon_z").get<double>()) <=
          1e-9);
    CHECK(std::fabs(doc.at("wilcoxon_p").get<double>() - stats.at("wilcoxon_p").get<double>()) <=
          1e-9);

    auto want_caar = csv::read_file(testutil::oracle_dir() / "expected" / "event_caar.csv");
    auto got_caar = csv::read_file(config.out_dir / "caar.csv");
    REQUIRE(got_caar.size() == want_caar.size());
    for (std::size_t r = 1; r < want_caar.size(); ++r) {
        double caar = csv::parse_double(want_caar[r][1], "caar");
        double se = csv::parse_double(want_caar[r][2], "se");
        CHECK(std::fabs(csv::parse_double(got_caar[r][1], "caar") - caar) <= 1e-9);
        CHECK(std::fabs(csv::parse_double(got_caar[r][2], "lo") - (caar - 1.96 * se)) <= 1e-9);
        CHECK(std::fabs(csv::parse_double(got_caar[r][3], "hi") - (caar + 1.96 * se)) <= 1e-9);
    }

    CHECK(doc.at("group_comparison").at("n_in").get<int>() == 6);
    CHECK(doc.at("group_comparison").at("n_out").get<int>() == 14);
    double diff = doc.at("group_comparison").at("mean_in").get<double>() -
                  doc.at("group_comparison").at("mean_out").get<double>();
    CHECK(doc.at("group_comparison").at("difference").get<double>() ==
          doctest::Approx(diff).epsilon(1e-12));
}

TEST_CASE("regress stage emits OLS and MM fits over the weight regressor") {
    TempDir dir("regress");
    auto config = fixture_config(dir.path());
    run_ingest(config);
    run_score(config);
    run_build_index(config);
    run_event_study(config);
    run_regress(config);

    std::ifstream in(config.out_dir / "regress_taii05_2023.json");
    REQUIRE(in.good());
    auto doc = nlohmann::json::parse(in);
    REQUIRE(doc.at("fits").size() == 2);
    CHECK(doc.at("fits")[0].at("method") == "OLS");
    CHECK(doc.at("fits")[1].at("method") == "MM");
    for (const auto& fit : doc.at("fits")) {
        CHECK(fit.at("n").get<int>() == 20);
        CHECK(fit.at("coefficients").size() == 2);
        CHECK(fit.at("coefficients")[0].at("name") == "const");
        CHECK(fit.at("coefficients")[1].at("name") == "taii05_2023");
        CHECK(fit.at("coefficients")[1].at("se").get<double>() >= 0.0);
    }
    CHECK(doc.at("fits")[1].at("seed").get<std::uint64_t>() == config.seed);
}

TEST_CASE("report emits the panel and the expense scatter") {
    TempDir dir("report");
    auto config = fixture_config(dir.path());
    run_ingest(config);
    run_score(config);
    run_build_index(config);
    run_report(config);

    auto panel = csv::read_file(config.out_dir / "panel.csv");
    REQUIRE(panel.size() == 9);  // header + 4 indices + 3 ETFs + IXIC
    CHECK(panel[1][0] == "AII");
    CHECK(panel[2][0] == "SAII");
    CHECK(panel[3][0] == "TAII05");
    CHECK(panel[4][0] == "TAII5X");
    CHECK(panel[5][0] == "BOTZ");
    CHECK(panel[6][0] == "QTUM");
    CHECK(panel[7][0] == "ROBO");
    CHECK(panel[8][0] == "IXIC");
    // benchmark row has no alpha/beta
    CHECK(panel[8][5] == "nan");
    CHECK(panel[8][6] == "nan");
    // index rows regress against the benchmark with sane betas
    double beta = csv::parse_double(panel[1][6], "beta");
    CHECK(beta > 0.2);
    CHECK(beta < 2.0);

    auto scatter = csv::read_file(config.out_dir / "scatter.csv");
    REQUIRE(scatter.size() == 4);  // BOTZ, QTUM, ROBO
    CHECK(scatter[1][0] == "BOTZ");
    CHECK(csv::parse_double(scatter[1][1], "er") == 0.69);
}

TEST_CASE("stage isolation: downstream artifacts rebuild identically") {
    TempDir dir("isolation");
    auto config = fixture_config(dir.path());
    run_ingest(config);
    run_score(config);
    run_build_index(config);
    run_event_study(config);

    auto index_bytes = testutil::read_file(config.out_dir / "index_saii.csv");
    auto event_bytes = testutil::read_file(config.out_dir / "event_study.json");
    std::filesystem::remove(config.out_dir / "index_saii.csv");
    std::filesystem::remove(config.out_dir / "event_study.json");

    run_build_index(config);
    run_event_study(config);
    CHECK(testutil::read_file(config.out_dir / "index_saii.csv") == index_bytes);
    CHECK(testutil::read_file(config.out_dir / "event_study.json") == event_bytes);
}

TEST_CASE("build-index with zero qualifying firms raises the empty-index error") {
    TempDir dir("empty");
    auto config = fixture_config(dir.path());
    run_ingest(config);
    config.keywords = "quantum blockchain*;metaverse";  // nothing matches
    run_score(config);
    CHECK_THROWS_AS(run_build_index(config), ComputationError);
}

namespace {

int cli(const std::string& args) {
    std::string cmd = std::string(AIDX_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
}

}  // namespace

TEST_CASE("cli exit codes follow the usage/data/computation contract") {
    TempDir dir("exitcodes");
    auto fixtures = testutil::data_dir() / "fixtures";
    std::string common = " --corpus-dir " + (dir / "corpus").string() + " --out-dir " +
                         (dir / "out").string();

    CHECK(cli("definitely-not-a-subcommand") == 1);
    CHECK(cli("score --no-such-flag" + common) == 1);
    // missing corpus: data error
    CHECK(cli("score" + common) == 2);

    CHECK(cli("ingest --raw-dir " + (fixtures / "raw").string() + common) == 0);
    CHECK(cli("score" + common) == 0);
    // zero qualifying firms: computation error from the empty index
    CHECK(cli("score --keywords \"metaverse;quantum\"" + common) == 0);
    CHECK(cli("build-index --prices " + (fixtures / "prices.csv").string() + " --universe " +
              (fixtures / "universe.csv").string() + common) == 3);
    CHECK(cli("--help") == 0);
}

TEST_CASE("cli builds a configured subset of schemes") {
    TempDir dir("subset");
    auto fixtures = testutil::data_dir() / "fixtures";
    std::string common = " --corpus-dir " + (dir / "corpus").string() + " --out-dir " +
                         (dir / "out").string();
    REQUIRE(cli("ingest --raw-dir " + (fixtures / "raw").string() + common) == 0);
    REQUIRE(cli("score" + common) == 0);
    REQUIRE(cli("build-index --index-specs aii,taii2.5 --prices " +
                (fixtures / "prices.csv").string() + " --universe " +
                (fixtures / "universe.csv").string() + common) == 0);
    CHECK(std::filesystem::exists(dir / "out" / "index_aii.csv"));
    CHECK(std::filesystem::exists(dir / "out" / "index_taii2.5.csv"));
    CHECK(!std::filesystem::exists(dir / "out" / "index_saii.csv"));
}

TEST_CASE("config file loads and unknown keys are rejected") {
    TempDir dir("config");
    testutil::write_file(dir / "aidx.conf",
                         "# fixture config\n"
                         "corpus_dir = /tmp/c\n"
                         "event_date = 2022-11-30\n"
                         "seed = 7\n"
                         "offline = false\n"
                         "split_scheme = saii\n");
    auto config = load_config_file(dir / "aidx.conf");
    CHECK(config.corpus_dir == std::filesystem::path("/tmp/c"));
    CHECK(config.event_date == Date{2022, 11, 30});
    CHECK(config.seed == 7);
    CHECK(!config.offline);
    CHECK(config.split_scheme == "saii");

    testutil::write_file(dir / "bad.conf", "not_a_key = 1\n");
    CHECK_THROWS_AS(load_config_file(dir / "bad.conf"), UsageError);
    testutil::write_file(dir / "bad2.conf", "no equals sign\n");
    CHECK_THROWS_AS(load_config_file(dir / "bad2.conf"), UsageError);
}

TEST_CASE("edgar client fetches, persists and honors the year range") {
    using nlohmann::json;
    httplib::Server server;
    std::string doc_2021 = "<html><body><p>We use artificial intelligence.</p></body></html>";
    std::string doc_2022 = "<html><body><p>More AI adoption.</p></body></html>";
    json index;
    index["filings"]["recent"]["form"] = {"10-K", "10-Q", "10-K"};
    index["filings"]["recent"]["filingDate"] = {"2021-03-01", "2021-06-30", "2022-03-02"};
    index["filings"]["recent"]["accessionNumber"] = {"0000001001-21-000001",
                                                     "0000001001-21-000002",
                                                     "0000001001-22-000001"};
    index["filings"]["recent"]["primaryDocument"] = {"k2021.htm", "q.htm", "k2022.htm"};

    std::atomic<int> doc_requests{0};
    server.Get("/submissions/CIK0000001001.json",
               [&](const httplib::Request& req, httplib::Response& res) {
                   CHECK(req.get_header_value("User-Agent") == "aidx tests test@example.com");
                   res.set_content(index.dump(), "application/json");
               });
    server.Get("/Archives/edgar/data/1001/000000100121000001/k2021.htm",
               [&](const httplib::Request&, httplib::Response& res) {
                   ++doc_requests;
                   res.set_content(doc_2021, "text/html");
               });
    server.Get("/Archives/edgar/data/1001/000000100122000001/k2022.htm",
               [&](const httplib::Request&, httplib::Response& res) {
                   ++doc_requests;
                   res.set_content(doc_2022, "text/html");
               });

    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    TempDir dir("edgar");
    corpus::CorpusPaths paths{dir / "corpus"};
    edgar::FetchConfig fetch;
    fetch.base_url = "http://127.0.0.1:" + std::to_string(port);
    fetch.user_agent = "aidx tests test@example.com";

    auto cik = corpus::canonicalize_cik("1001");
    auto filings = edgar::fetch_filings(cik, {2021, 2022}, fetch, paths);
    REQUIRE(filings.size() == 2);
    CHECK(filings[0].filing_year == 2021);
    CHECK(filings[0].text == "We use artificial intelligence.");
    CHECK(filings[1].filing_year == 2022);
    CHECK(doc_requests == 2);

    auto manifest = corpus::read_manifest(paths);
    CHECK(manifest.size() == 2);
    CHECK(corpus::load_filing(paths, manifest[0]).text == filings[0].text);

    // Re-fetch overwrites identical content.
    auto again = edgar::fetch_filings(cik, {2021, 2022}, fetch, paths);
    CHECK(again.size() == 2);
    CHECK(corpus::read_manifest(paths).size() == 2);

    // Restricting the range only downloads the matching year.
    auto only_2022 = edgar::fetch_filings(cik, {2022, 2022}, fetch, paths);
    REQUIRE(only_2022.size() == 1);
    CHECK(only_2022[0].filing_year == 2022);

    // Empty range: no filings, no document requests.
    int before = doc_requests;
    CHECK(edgar::fetch_filings(cik, {2022, 2021}, fetch, paths).empty());
    CHECK(doc_requests == before);

    server.stop();
    server_thread.join();

    // Unreachable endpoint fails after bounded retries.
    edgar::FetchConfig dead = fetch;
    dead.base_url = "http://127.0.0.1:1";
    dead.max_retries = 1;
    dead.timeout_seconds = 1;
    CHECK_THROWS_AS(edgar::fetch_filings(cik, {2021, 2022}, dead, paths), DataError);
}
