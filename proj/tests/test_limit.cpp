#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nearzero/errors.hpp"
#include "nearzero/lambda_model.hpp"
#include "nearzero/limit_process.hpp"
#include "nearzero/numerics.hpp"
#include "nearzero/stats.hpp"

using namespace nearzero;

namespace {

const double kPi = std::acos(-1.0);

// fresh stream per call site so cases stay order independent
RngStream stream(std::uint64_t replica, const char* tag = "unit/limit") {
    return RngStream(21, tag, replica);
}

} // namespace

TEST_CASE("spine weights and their sums") {
    CHECK(spine_g(1.5, 1) == doctest::Approx(std::sqrt(kPi) / 2.0).epsilon(1e-13));
    for (double alpha : {1.2, 1.5, 1.9}) {
        for (std::int64_t j = 1; j <= 50; ++j) {
            CHECK(spine_g(alpha, j + 1) ==
                  doctest::Approx(spine_g(alpha, j) * (static_cast<double>(j) + 1.0 - alpha) /
                                  (static_cast<double>(j) + 2.0))
                      .epsilon(1e-12));
        }
        CHECK(spine_g_total(alpha) ==
              doctest::Approx(gamma_fn(2.0 - alpha) / alpha).epsilon(1e-13));
        CHECK(spine_g_first_moment(alpha) ==
              doctest::Approx(gamma_fn(2.0 - alpha) / (alpha * (alpha - 1.0))).epsilon(1e-13));

        // closed-form tails complete the partial sums of both laws
        double line = 0.0, imm = 0.0;
        for (std::int64_t j = 1; j <= 40; ++j) {
            line += spine_g(alpha, j) / spine_g_total(alpha);
            imm += static_cast<double>(j) * spine_g(alpha, j) / spine_g_first_moment(alpha);
        }
        CHECK(line + offspring_tail(alpha, 41) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(imm + immigrant_tail(alpha, 41) == doctest::Approx(1.0).epsilon(1e-12));
    }
    // unit jumps in the brownian case
    CHECK(spine_g(2.0, 1) == 1.0);
    CHECK(spine_g(2.0, 5) == 0.0);
    CHECK(offspring_tail(2.0, 2) == 0.0);
    CHECK_THROWS_AS(spine_g(1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(spine_g(1.5, 0), std::invalid_argument);
}

TEST_CASE("tabulated jump laws") {
    OffspringDist line = offspring_pmf(1.5, 4000, 1e-5);
    double sum = 0.0;
    for (double p : line.pmf)
        sum += p;
    CHECK(sum + line.tail_mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(line.pmf[0] / line.pmf[1] == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(line.pmf[0] == doctest::Approx(0.75).epsilon(1e-13)); // alpha/2

    OffspringDist imm = immigrant_pmf(1.5, 4000, 1e-1);
    sum = 0.0;
    for (std::size_t j = 0; j < imm.pmf.size(); ++j) {
        CHECK(imm.pmf[j] ==
              doctest::Approx(static_cast<double>(j + 1) * spine_g(1.5, static_cast<std::int64_t>(j + 1)) /
                              spine_g_first_moment(1.5))
                      .epsilon(1e-11));
        sum += imm.pmf[j];
    }
    CHECK(sum + imm.tail_mass == doctest::Approx(1.0).epsilon(1e-12));

    OffspringDist unit = offspring_pmf(2.0, 8);
    CHECK(unit.pmf[0] == 1.0);
    CHECK(unit.tail_mass == 0.0);

    // a short table cannot meet a tight tail tolerance
    CHECK_THROWS_AS(offspring_pmf(1.5, 4, 1e-9), std::invalid_argument);
    CHECK_THROWS_AS(immigrant_pmf(1.5, 100, 1e-9), std::invalid_argument);
}

TEST_CASE("chain rates match the model-level formula") {
    LambdaModel beta = LambdaModel::beta(1.5);
    ZSimulator sim(1.5, beta.a_lambda);
    for (std::int64_t i : {1, 2, 7}) {
        for (std::int64_t j : {1, 2, 5}) {
            for (double r : {0.0, 0.5, 0.9}) {
                CHECK(sim.jump_rate(i, j, r) ==
                      doctest::Approx(limit_jump_rate(i, j, r, beta)).epsilon(1e-12));
            }
        }
    }
    // exit rate collects the per-jump rates; the sum below still misses a
    // j^(1-alpha) tail, hence the loose tolerance
    for (std::int64_t i : {1, 4}) {
        double total = 0.0;
        for (std::int64_t j = 1; j <= 100000; ++j)
            total += sim.jump_rate(i, j, 0.0);
        CHECK(sim.exit_rate(i) == doctest::Approx(total).epsilon(0.01));
        CHECK(sim.exit_rate(i) >= total);
    }

    ZSimulator unit(2.0, 1.0);
    CHECK(unit.rate_constant() == 1.0);
    CHECK(unit.exit_rate(5) == doctest::Approx(6.0).epsilon(1e-13));
    CHECK(unit.jump_rate(5, 1, 0.5) == doctest::Approx(12.0).epsilon(1e-12));
    RngStream rng = stream(0);
    for (int k = 0; k < 30; ++k)
        CHECK(unit.sample_jump(3, rng) == 1);
    CHECK_THROWS_AS(sim.jump_rate(1, 1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(sim.sample_jump(0, rng), std::invalid_argument);
}

TEST_CASE("jump sizes follow the size-biased mixture") {
    LambdaModel beta = LambdaModel::beta(1.5);
    ZSimulator sim(1.5, beta.a_lambda);
    const std::int64_t i = 3;
    const std::int64_t top = 60;
    RngStream rng = stream(1);

    const int draws = 100000;
    std::vector<std::int64_t> sample(draws);
    for (int d = 0; d < draws; ++d)
        sample[static_cast<std::size_t>(d)] = sim.sample_jump(i, rng);
    std::vector<double> emp = empirical_pmf(sample, top);

    // P(j | i) = (i+j) g(j) / (i G + G1)
    double denom = static_cast<double>(i) * spine_g_total(1.5) + spine_g_first_moment(1.5);
    std::vector<double> ref(static_cast<std::size_t>(top) + 1, 0.0);
    double head = 0.0;
    for (std::int64_t j = 1; j <= top; ++j) {
        ref[static_cast<std::size_t>(j) - 1] =
            (static_cast<double>(i) + static_cast<double>(j)) * spine_g(1.5, j) / denom;
        head += ref[static_cast<std::size_t>(j) - 1];
    }
    ref[static_cast<std::size_t>(top)] = 1.0 - head;
    CHECK(total_variation(emp, ref) < 0.015);
}

TEST_CASE("brownian-case chain has closed-form marginals") {
    ZSimulator unit(2.0, 1.0);
    const double r = 0.5;

    MarginalZ oracle = marginal_Z_oracle(2.0, 1.0, r, 64, 1e-6);
    for (std::int64_t k = 1; k <= 20; ++k) {
        double want = static_cast<double>(k) * (1.0 - r) * (1.0 - r) *
                      std::pow(r, static_cast<double>(k - 1));
        CHECK(oracle.pmf[static_cast<std::size_t>(k) - 1] ==
              doctest::Approx(want).epsilon(1e-8));
    }

    RngStream rng = stream(2);
    const int draws = 100000;
    std::vector<std::int64_t> sample(draws);
    double mean = 0.0;
    int ones = 0;
    for (int d = 0; d < draws; ++d) {
        sample[static_cast<std::size_t>(d)] = unit.marginal_absorbed(r, 64, rng);
        mean += static_cast<double>(sample[static_cast<std::size_t>(d)]) / draws;
        ones += sample[static_cast<std::size_t>(d)] == 1;
    }
    CHECK(mean == doctest::Approx((1.0 + r) / (1.0 - r)).epsilon(0.03));
    CHECK(std::abs(static_cast<double>(ones) / draws - 0.25) < 0.012);

    std::vector<double> emp = empirical_pmf(sample, 63);
    std::vector<double> ref(oracle.pmf.begin(), oracle.pmf.end() - 1);
    ref.push_back(oracle.pmf.back() + oracle.leak);
    CHECK(total_variation(emp, ref) < 0.02);
}

TEST_CASE("heavy-tailed marginal matches the forward-equation oracle") {
    LambdaModel beta = LambdaModel::beta(1.5);
    ZSimulator sim(1.5, beta.a_lambda);
    const double r = 0.5;
    const std::int64_t cap = 2048;

    MarginalZ oracle = marginal_Z_oracle(1.5, beta.a_lambda, r, cap, 0.1);
    CHECK(oracle.leak < 0.1);
    double mass = oracle.leak;
    for (double p : oracle.pmf)
        mass += p;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));

    RngStream rng = stream(3);
    const int draws = 1000000;
    std::vector<std::int64_t> sample(draws);
    for (int d = 0; d < draws; ++d)
        sample[static_cast<std::size_t>(d)] = sim.marginal_absorbed(r, cap, rng);
    std::vector<double> emp = empirical_pmf(sample, cap - 1);
    std::vector<double> ref(oracle.pmf.begin(), oracle.pmf.end() - 1);
    ref.push_back(oracle.pmf.back() + oracle.leak);
    CHECK(total_variation(emp, ref) < 0.02);

    // tight leak tolerances are refused rather than silently violated
    CHECK_THROWS_AS(marginal_Z_oracle(1.2, 1.0, 0.9, 32, 1e-4), numeric_error);
}

TEST_CASE("the two path samplers agree") {
    LambdaModel beta = LambdaModel::beta(1.5);
    const double r_max = 0.7;
    const int reps = 4000;
    // jump sizes are heavy tailed, so a rare replica exhausts the jump
    // budget; redrawing conditions both samplers on the same cheap event
    auto draw = [&](const char* tag, std::uint64_t replica, bool thin) {
        for (std::uint64_t attempt = 0;; ++attempt) {
            RngStream r = stream(replica + 100000 * attempt, tag);
            try {
                return thin ? simulate_Z_thinning(1.5, beta.a_lambda, r_max, r).final_value()
                            : simulate_Z(1.5, beta.a_lambda, r_max, r).final_value();
            } catch (const resource_error&) {
            }
        }
    };
    std::vector<double> direct(reps), thinned(reps);
    for (int i = 0; i < reps; ++i) {
        direct[static_cast<std::size_t>(i)] = draw("unit/zdirect", static_cast<std::uint64_t>(i), false);
        thinned[static_cast<std::size_t>(i)] = draw("unit/zthin", static_cast<std::uint64_t>(i), true);
    }
    CHECK(ks_two_sample(direct, thinned) < 0.04);
}

TEST_CASE("paths start at one, never decrease, and honor the budget") {
    LambdaModel beta = LambdaModel::beta(1.5);
    RngStream rng = stream(4);
    JumpPath z = simulate_Z(1.5, beta.a_lambda, 0.9, rng);
    CHECK(z.times.front() == 0.0);
    CHECK(z.values.front() == 1.0);
    for (std::size_t i = 1; i < z.times.size(); ++i) {
        CHECK(z.times[i] > z.times[i - 1]);
        CHECK(z.times[i] < 0.9);
        CHECK(z.values[i] > z.values[i - 1]);
    }
    RngStream rng2 = stream(5);
    CHECK_THROWS_AS(simulate_Z(1.5, beta.a_lambda, 0.999999, rng2, 10), resource_error);
}

TEST_CASE("birth log mirrors the driving path") {
    JumpPath z;
    z.times = {0.0, 0.4};
    z.values = {1.0, 3.0};
    RngStream rng = stream(6);
    LimitTree t = limit_tree_events(z, 0.1, rng);
    CHECK(t.particles() == 3);
    REQUIRE(t.births.size() == 1);
    CHECK(t.births[0].r == 0.4);
    CHECK(t.births[0].count == 2);
    CHECK(t.births[0].parent == 0);

    Dendrogram d = dendrogram_from_limit_tree(t);
    d.validate();
    REQUIRE(d.leaf_count == 3);
    CHECK(d.point == 0);
    CHECK(d.distance(0, 1) == doctest::Approx(0.6).epsilon(1e-13));
    CHECK(d.distance(0, 2) == doctest::Approx(0.6).epsilon(1e-13));
    CHECK(d.distance(1, 2) == doctest::Approx(0.6).epsilon(1e-13));
    CHECK(ball_count(d, 0.59) == 3);
    CHECK(ball_count(d, 0.6) == 1);
    for (double m : d.mass)
        CHECK(m == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("limit genealogy ball counts recover the chain") {
    LambdaModel beta = LambdaModel::beta(1.5);
    const double eta = 0.1;
    RngStream zr = stream(7);
    JumpPath z = simulate_Z(1.5, beta.a_lambda, 1.0 - eta, zr);
    RngStream tr = stream(8);
    LimitTree t = limit_tree_events(z, eta, tr);
    CHECK(t.particles() == static_cast<std::int64_t>(z.value_at(1.0 - eta)));
    for (const auto& b : t.births) {
        CHECK(b.r <= 1.0 - eta);
        CHECK(b.count >= 1);
        CHECK(b.parent >= 0);
    }

    Dendrogram d = dendrogram_from_limit_tree(t);
    d.validate();
    CHECK(d.leaf_count == t.particles());
    for (double r : {0.13, 0.37, 0.61, 0.83}) {
        CHECK(static_cast<double>(ball_count(d, 1.0 - r)) == z.value_at(r));
    }
}

TEST_CASE("pair-weight process under brownian scaling") {
    const double t0 = 0.5;
    const double t1 = t0 * std::exp(1.0);

    CHECK(x_marginal_cdf(1.0, 0.0) == 0.0);
    CHECK(x_marginal_cdf(0.5, 2.0) == doctest::Approx(gamma2_cdf(2.0, 1.0)).epsilon(1e-13));

    const int reps = 3000;
    std::vector<double> finals(reps);
    std::vector<std::int64_t> jumps(reps);
    for (int i = 0; i < reps; ++i) {
        RngStream rng = stream(static_cast<std::uint64_t>(i), "unit/xpath");
        JumpPath x = simulate_X(t0, t1, rng);
        CHECK(x.times.front() == t0);
        for (std::size_t k = 1; k < x.values.size(); ++k)
            CHECK(x.values[k] > x.values[k - 1]);
        finals[static_cast<std::size_t>(i)] = x.final_value();
        jumps[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(x.jump_count());
    }
    CHECK(ks_one_sample(finals, [&](double v) { return x_marginal_cdf(t1, v); }) < 0.04);
    // the jump clock integrates 2/t to exactly 2 on [t0, e t0]
    CHECK(poisson_gof(jumps, 2.0).p_value > 1e-4);
}
