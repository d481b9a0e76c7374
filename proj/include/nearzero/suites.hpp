#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nearzero/config.hpp"
#include "nearzero/lambda_model.hpp"
#include "nearzero/report.hpp"

namespace nearzero {

// Shared knobs for a verification run. Per-suite keys in the Config (for
// example "c2.replicas") override these where a suite documents it.
struct RunConfig {
    LambdaModel model = LambdaModel::kingman();
    std::int64_t n = 100000;
    std::vector<double> epsilons;
    std::vector<double> rs;
    std::int64_t replicas = 200;
    double dt = 1e-4;
    std::uint64_t seed = 0;
    std::string outdir = "out";
    std::vector<std::string> suites;
    int threads = 0; // 0 means use the hardware thread count

    // Reads the shared keys. "seed" has no default: runs must be replayable.
    static RunConfig from_config(Config& cfg);
};

std::vector<std::string> suite_names();

// Runs the selected suites ("all" expands to every suite) and writes
// report.csv, summary.json and per-suite sample dumps under run.outdir.
// A suite that exhausts its resource budget contributes an explicit not-run
// row instead of aborting the whole run. Statistic rows in the returned
// vector are deterministic given (config, seed); runtimes are not.
std::vector<StatReport> run_suite(const RunConfig& run, Config& cfg);

// Runs body(0..count-1) on a small thread pool. Results must be written to
// distinct slots indexed by the argument so scheduling cannot reorder them.
// The first exception thrown by any body is rethrown after the pool joins.
void parallel_for(std::int64_t count, int threads,
                  const std::function<void(std::int64_t)>& body);

} // namespace nearzero
