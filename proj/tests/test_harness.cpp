#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nearzero/config.hpp"
#include "nearzero/report.hpp"
#include "nearzero/suites.hpp"

using namespace nearzero;

namespace {

std::string slurp(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

} // namespace

TEST_CASE("config parses key=value text with comments and lists") {
    Config cfg = Config::from_string("# leading comment\n"
                                     "\n"
                                     "  a = 1.5 \n"
                                     "b=2\n"
                                     "rate = 1e-3\n"
                                     "list = 1, 2,3\n"
                                     "empty =\n"
                                     "flag = true\n"
                                     "name = hello\n"
                                     "words = x, y\n");
    CHECK(cfg.get_double("a") == 1.5);
    CHECK(cfg.get_int("b") == 2);
    CHECK(cfg.get_double("rate") == 1e-3);
    CHECK(cfg.get_double_list("list") == (std::vector<double>{1.0, 2.0, 3.0}));
    CHECK(cfg.get_double_list("empty").empty());
    CHECK(cfg.get_bool("flag", false));
    CHECK(cfg.get_string("name") == "hello");
    CHECK(cfg.get_string_list("words") == (std::vector<std::string>{"x", "y"}));
    CHECK(cfg.has("a"));
    CHECK(!cfg.has("zzz"));
}

TEST_CASE("config rejects duplicates and reports missing keys") {
    CHECK_THROWS_AS(Config::from_string("a = 1\na = 2\n"), std::invalid_argument);
    Config cfg = Config::from_string("a = 1\n");
    CHECK_THROWS_AS(cfg.get_double("zzz"), std::invalid_argument);
    CHECK(cfg.get_double("zzz", 7.5) == 7.5);
    CHECK(cfg.get_int("a") == 1);
}

TEST_CASE("config set overrides and usage tracking finds typo keys") {
    Config cfg = Config::from_string("a = 1\nb = 2\n");
    cfg.set("a", "9");
    CHECK(cfg.get_int("a") == 9);
    CHECK(cfg.unused_keys() == (std::vector<std::string>{"b"}));
    CHECK_THROWS_AS(cfg.require_all_used(), std::invalid_argument);
    CHECK(cfg.get_int("b") == 2);
    CHECK(cfg.unused_keys().empty());
    cfg.require_all_used();
}

TEST_CASE("report rows carry the comparison that was made") {
    StatReport ok = report_le("stat.ks", 0.03, 0.05, 1000, 2000);
    CHECK(ok.pass);
    CHECK(ok.relation == "<=");
    CHECK(ok.sample_a == 1000);
    CHECK(ok.sample_b == 2000);
    CHECK(report_le("edge", 1.0, 1.0).pass); // boundary counts as pass
    CHECK(!report_le("bad", 2.0, 1.0).pass);
    CHECK(report_ge("p", 0.5, 0.01).pass);
    CHECK(!report_ge("p", 0.001, 0.01).pass);

    CHECK(format_report_line(ok).find("PASS") != std::string::npos);
    CHECK(format_report_line(report_le("bad", 2.0, 1.0)).find("FAIL") != std::string::npos);
    StatReport skipped = report_not_run("late", "budget exhausted");
    CHECK(!skipped.ran);
    CHECK(format_report_line(skipped).find("NOT RUN") != std::string::npos);
    CHECK(skipped.note == "budget exhausted");
}

TEST_CASE("report csv is a deterministic artifact") {
    std::vector<StatReport> rows = {report_le("a.first", 0.1, 0.5, 100),
                                    report_ge("b.second", 0.02, 0.01),
                                    report_not_run("c.third", "skipped for the test")};
    rows[0].runtime_seconds = 1.25; // runtimes must not leak into the csv
    const std::filesystem::path fa = "harness_report_a.csv";
    const std::filesystem::path fb = "harness_report_b.csv";
    write_report_csv(rows, fa.string());
    rows[0].runtime_seconds = 99.0;
    write_report_csv(rows, fb.string());
    const std::string a = slurp(fa);
    CHECK(a == slurp(fb));
    CHECK(a.find("a.first") != std::string::npos);
    CHECK(a.find("0.1") != std::string::npos);
    std::filesystem::remove(fa);
    std::filesystem::remove(fb);
}

TEST_CASE("parallel_for covers every index exactly once") {
    for (int threads : {1, 8}) {
        std::vector<std::int64_t> slots(200, -1);
        parallel_for(200, threads, [&](std::int64_t i) { slots[static_cast<std::size_t>(i)] = 3 * i + 1; });
        for (std::int64_t i = 0; i < 200; ++i)
            CHECK(slots[static_cast<std::size_t>(i)] == 3 * i + 1);
    }
    std::atomic<int> calls{0};
    parallel_for(0, 4, [&](std::int64_t) { calls.fetch_add(1); });
    CHECK(calls.load() == 0);
    CHECK_THROWS_AS(parallel_for(50, 4,
                                 [&](std::int64_t i) {
                                     if (i == 13)
                                         throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
}

TEST_CASE("run config reads the shared keys and insists on a seed") {
    Config missing = Config::from_string("suite = c7\n");
    CHECK_THROWS_AS(RunConfig::from_config(missing), std::invalid_argument);

    Config bad = Config::from_string("seed = 1\nmodel = cauchy\n");
    CHECK_THROWS_AS(RunConfig::from_config(bad), std::invalid_argument);

    Config full = Config::from_string("seed = 42\nsuite = c1,c2\nout = abc\n"
                                      "model = beta\nalpha = 1.7\nn = 5000\n"
                                      "epsilons = 0.1,0.01\nrs = 0,0.5\n"
                                      "replicas = 77\ndt = 0.001\nthreads = 3\n");
    RunConfig run = RunConfig::from_config(full);
    CHECK(run.seed == 42);
    CHECK(run.suites == (std::vector<std::string>{"c1", "c2"}));
    CHECK(run.outdir == "abc");
    CHECK(run.model.kind == LambdaKind::Beta);
    CHECK(run.model.alpha == 1.7);
    CHECK(run.n == 5000);
    CHECK(run.epsilons == (std::vector<double>{0.1, 0.01}));
    CHECK(run.rs == (std::vector<double>{0.0, 0.5}));
    CHECK(run.replicas == 77);
    CHECK(run.dt == 0.001);
    CHECK(run.threads == 3);
    full.require_all_used();

    Config defaults = Config::from_string("seed = 1\n");
    RunConfig d = RunConfig::from_config(defaults);
    CHECK(d.model.kind == LambdaKind::Beta);
    CHECK(d.model.alpha == 1.5);
    CHECK(d.n == 100000);
    CHECK(d.suites.empty());
    CHECK(d.threads == 0);
}

TEST_CASE("suite registry and trivial runs") {
    const std::vector<std::string> names = suite_names();
    REQUIRE(names.size() == 10);
    CHECK(names.front() == "c1");
    CHECK(names.back() == "c10");

    Config cfg = Config::from_string("seed = 5\nout = harness_tmp_none\n");
    RunConfig run = RunConfig::from_config(cfg);
    CHECK(run_suite(run, cfg).empty());

    run.suites = {"c99"};
    CHECK_THROWS_AS(run_suite(run, cfg), std::invalid_argument);
    std::filesystem::remove_all("harness_tmp_none");
}

TEST_CASE("a suite run is byte-for-byte replayable") {
    const std::string base = "seed = 11\n"
                             "suite = c7\n"
                             "model = kingman\n"
                             "threads = 2\n"
                             "c7.sym_tol = 0\n"
                             "c7.triangle_tol = 0.000000000001\n"
                             "c7.two_point_tol = 0\n"
                             "c7.bracket_violations = 0\n"
                             "c7.triples = 25\n"
                             "c7.pairs = 40\n";
    Config ca = Config::from_string(base + "out = harness_tmp_a\n");
    RunConfig ra = RunConfig::from_config(ca);
    std::vector<StatReport> rows_a = run_suite(ra, ca);
    Config cb = Config::from_string(base + "out = harness_tmp_b\n");
    RunConfig rb = RunConfig::from_config(cb);
    std::vector<StatReport> rows_b = run_suite(rb, cb);

    REQUIRE(!rows_a.empty());
    REQUIRE(rows_a.size() == rows_b.size());
    for (const StatReport& r : rows_a) {
        CHECK(r.ran);
        CHECK(r.pass);
    }
    CHECK(slurp("harness_tmp_a/report.csv") == slurp("harness_tmp_b/report.csv"));
    std::filesystem::remove_all("harness_tmp_a");
    std::filesystem::remove_all("harness_tmp_b");
}
