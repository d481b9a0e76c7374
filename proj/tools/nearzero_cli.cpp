#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nearzero/coalescent.hpp"
#include "nearzero/config.hpp"
#include "nearzero/dendrogram.hpp"
#include "nearzero/gromov.hpp"
#include "nearzero/jump_path.hpp"
#include "nearzero/lambda_model.hpp"
#include "nearzero/limit_process.hpp"
#include "nearzero/path_grid.hpp"
#include "nearzero/report.hpp"
#include "nearzero/rng.hpp"
#include "nearzero/suites.hpp"

using namespace nearzero;

namespace {

LambdaModel pick_model(const std::string& kind, double alpha) {
    if (kind == "kingman")
        return LambdaModel::kingman();
    if (kind == "beta")
        return LambdaModel::beta(alpha);
    throw std::invalid_argument("model must be kingman or beta, got: " + kind);
}

JumpPath block_count_path(const CoalescentHistory& h) {
    JumpPath path;
    path.times.push_back(0.0);
    path.values.push_back(static_cast<double>(h.n));
    for (const MergerEvent& e : h.events) {
        path.times.push_back(e.time);
        path.values.push_back(static_cast<double>(e.blocks_after));
    }
    return path;
}

std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (const std::string& p : parts) {
        if (!out.empty())
            out.push_back(sep);
        out += p;
    }
    return out;
}

} // namespace

int main(int argc, char** argv) try {
    CLI::App app{"simulation and verification toolkit for Lambda-coalescent behavior near time zero"};
    app.require_subcommand(1);

    std::string model_kind = "beta";
    double alpha = 1.5;
    std::int64_t n = 1000;
    std::uint64_t seed = 0;
    std::string out_dir = "out";

    auto* rates = app.add_subcommand("rates", "tabulate merger and total rates for a model");
    std::int64_t rates_n = 30;
    rates->add_option("--model", model_kind, "kingman or beta");
    rates->add_option("--alpha", alpha, "beta model exponent in (1,2)");
    rates->add_option("--n", rates_n, "largest block count tabulated");

    auto* sim = app.add_subcommand("simulate", "run the coalescent and write the block-count path");
    double sim_time = 0.01;
    sim->add_option("--model", model_kind, "kingman or beta");
    sim->add_option("--alpha", alpha, "beta model exponent in (1,2)");
    sim->add_option("--n", n, "initial block count");
    sim->add_option("--time", sim_time, "simulation horizon");
    sim->add_option("--seed", seed, "stream seed")->required();
    sim->add_option("--out", out_dir, "output directory");

    auto* zp = app.add_subcommand("zpath", "extract the window chain of the block containing 1");
    double zp_eps = 1e-3;
    zp->add_option("--model", model_kind, "kingman or beta");
    zp->add_option("--alpha", alpha, "beta model exponent in (1,2)");
    zp->add_option("--n", n, "initial block count");
    zp->add_option("--epsilon", zp_eps, "window width");
    zp->add_option("--seed", seed, "stream seed")->required();
    zp->add_option("--out", out_dir, "output directory");

    auto* lz = app.add_subcommand("limit-z", "simulate the limiting block-counting chain");
    double lz_a_lambda = 0.0;
    double lz_r_max = 0.9;
    lz->add_option("--alpha", alpha, "tail exponent in (1,2]");
    lz->add_option("--a-lambda", lz_a_lambda, "head coefficient; 0 means the Beta value");
    lz->add_option("--r-max", lz_r_max, "simulate on [0, r_max], r_max < 1");
    lz->add_option("--seed", seed, "stream seed")->required();
    lz->add_option("--out", out_dir, "output directory");

    auto* lx = app.add_subcommand("limit-x", "simulate the limiting frequency process");
    double lx_t0 = 0.5, lx_t1 = 2.0;
    lx->add_option("--t0", lx_t0, "start time, positive");
    lx->add_option("--t1", lx_t1, "end time");
    lx->add_option("--seed", seed, "stream seed")->required();
    lx->add_option("--out", out_dir, "output directory");

    auto* br = app.add_subcommand("brownian", "sample a two-sided Brownian path on a grid");
    double br_time = 10.0, br_dt = 1e-4;
    br->add_option("--time", br_time, "horizon on each side");
    br->add_option("--dt", br_dt, "grid step");
    br->add_option("--seed", seed, "stream seed")->required();
    br->add_option("--out", out_dir, "output directory");

    auto* gh = app.add_subcommand("gh", "Gromov-Hausdorff distance between two dendrogram files");
    std::string gh_a, gh_b;
    gh->add_option("first", gh_a, "dendrogram file")->required();
    gh->add_option("second", gh_b, "dendrogram file")->required();

    auto* vf = app.add_subcommand("verify", "run verification suites from a config");
    std::string config_path;
    std::vector<std::string> vf_suites;
    std::int64_t vf_threads = 0;
    auto* vf_config = vf->add_option("--config", config_path, "key=value config file");
    auto* vf_seed = vf->add_option("--seed", seed, "overrides the config seed");
    auto* vf_out = vf->add_option("--out", out_dir, "overrides the config output directory");
    auto* vf_suite = vf->add_option("--suite", vf_suites, "suite names, or 'all'");
    auto* vf_threads_opt = vf->add_option("--threads", vf_threads, "worker threads, 0 = hardware");

    CLI11_PARSE(app, argc, argv);

    if (rates->parsed()) {
        const LambdaModel model = pick_model(model_kind, alpha);
        std::printf("n,k,lambda,gamma\n");
        for (std::int64_t b = 2; b <= rates_n; ++b)
            for (std::int64_t k = 2; k <= b; ++k)
                std::printf("%lld,%lld,%.12g,%.12g\n", static_cast<long long>(b),
                            static_cast<long long>(k), lambda_rate(b, k, model),
                            gamma_rate(b, k, model));
        std::printf("\nn,total_rate\n");
        for (std::int64_t b = 1; b <= rates_n; ++b)
            std::printf("%lld,%.12g\n", static_cast<long long>(b), total_rate(b, model));
        return 0;
    }

    if (sim->parsed()) {
        const LambdaModel model = pick_model(model_kind, alpha);
        const CoalescentHistory h = simulate_coalescent(
            model, static_cast<std::int32_t>(n), StopRule::until_time(sim_time), seed);
        std::filesystem::create_directories(out_dir);
        const std::string file = out_dir + "/blocks.csv";
        write_jump_path_csv(block_count_path(h), file);
        std::printf("%s: %zu mergers, %lld blocks at t=%.12g\n", file.c_str(), h.events.size(),
                    static_cast<long long>(block_count(h, sim_time)), sim_time);
        return 0;
    }

    if (zp->parsed()) {
        const LambdaModel model = pick_model(model_kind, alpha);
        const CoalescentHistory h = simulate_coalescent(
            model, static_cast<std::int32_t>(n), StopRule::until_time(zp_eps), seed);
        const JumpPath z = extract_Z(h, zp_eps);
        std::filesystem::create_directories(out_dir);
        const std::string file = out_dir + "/zpath.csv";
        write_jump_path_csv(z, file);
        std::printf("%s: %zu jumps, Z(0)=%g, final %g\n", file.c_str(), z.jump_count(),
                    z.values.front(), z.final_value());
        return 0;
    }

    if (lz->parsed()) {
        double a = lz_a_lambda;
        if (a == 0.0)
            a = alpha == 2.0 ? 1.0 : LambdaModel::beta(alpha).a_lambda;
        RngStream rng(seed, "cli/limit-z");
        const JumpPath z = simulate_Z(alpha, a, lz_r_max, rng);
        std::filesystem::create_directories(out_dir);
        const std::string file = out_dir + "/limit_z.csv";
        write_jump_path_csv(z, file);
        std::printf("%s: %zu jumps, final %g\n", file.c_str(), z.jump_count(), z.final_value());
        return 0;
    }

    if (lx->parsed()) {
        RngStream rng(seed, "cli/limit-x");
        const JumpPath x = simulate_X(lx_t0, lx_t1, rng);
        std::filesystem::create_directories(out_dir);
        const std::string file = out_dir + "/limit_x.csv";
        write_jump_path_csv(x, file);
        std::printf("%s: %zu jumps, X(t0)=%g, final %g\n", file.c_str(), x.jump_count(),
                    x.values.front(), x.final_value());
        return 0;
    }

    if (br->parsed()) {
        RngStream rng(seed, "cli/brownian");
        const PathGrid w = simulate_two_sided_bm(br_time, br_dt, rng);
        std::filesystem::create_directories(out_dir);
        const std::string base = out_dir + "/brownian";
        write_path(w, base, seed);
        std::printf("%s.csv: %zu samples, dt=%.12g\n", base.c_str(), w.values.size(), w.dt);
        return 0;
    }

    if (gh->parsed()) {
        const Dendrogram a = read_dendrogram(gh_a);
        const Dendrogram b = read_dendrogram(gh_b);
        if (a.leaf_count <= 16 && b.leaf_count <= 16) {
            std::printf("gh %.12g\n", gh_exact(a, b));
        } else {
            const GhBounds bd = gh_bounds(a, b);
            std::printf("gh_lower %.12g\ngh_upper %.12g\n", bd.lower, bd.upper);
        }
        std::printf("pointed_gh %.12g\n", pointed_gh(a, b));
        return 0;
    }

    // verify
    Config cfg = vf_config->count() ? Config::from_file(config_path) : Config::from_string("");
    if (vf_seed->count())
        cfg.set("seed", std::to_string(seed));
    if (vf_out->count())
        cfg.set("out", out_dir);
    if (vf_suite->count())
        cfg.set("suite", join(vf_suites, ','));
    if (vf_threads_opt->count())
        cfg.set("threads", std::to_string(vf_threads));
    RunConfig run = RunConfig::from_config(cfg);
    const std::vector<StatReport> rows = run_suite(run, cfg);
    cfg.get_string_list("expect_red", {}); // acceptance-harness key, not ours
    bool all_selected = false;
    for (const std::string& s : run.suites)
        all_selected = all_selected || s == "all";
    if (all_selected)
        cfg.require_all_used(); // a full run must consume every key
    for (const StatReport& row : rows)
        std::printf("%s\n", format_report_line(row).c_str());
    std::int64_t failed = 0;
    for (const StatReport& row : rows)
        failed += (!row.ran || !row.pass) ? 1 : 0;
    std::printf("%zu checks, %lld failed; artifacts in %s\n", rows.size(),
                static_cast<long long>(failed), run.outdir.c_str());
    return failed == 0 ? 0 : 1;
} catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
}
