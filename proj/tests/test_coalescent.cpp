#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "nearzero/coalescent.hpp"
#include "nearzero/numerics.hpp"
#include "nearzero/stats.hpp"

using namespace nearzero;

namespace {

// block holding `label` at time t, by the parent-pointer walk
std::int32_t block_root(const CoalescentHistory& h, std::int32_t label, double t) {
    std::int32_t v = label;
    while (h.parent[static_cast<std::size_t>(v)] >= 0 &&
           h.node_time[static_cast<std::size_t>(h.parent[static_cast<std::size_t>(v)])] <= t)
        v = h.parent[static_cast<std::size_t>(v)];
    return v;
}

// three leaves: {0,1} merge at 0.25 into block 3, {3,2} merge at 0.75 into 4
CoalescentHistory toy_history() {
    CoalescentHistory h;
    h.n = 3;
    h.events = {{0.25, 3, 2, {0, 1}}, {0.75, 4, 1, {3, 2}}};
    h.final_time = 0.75;
    h.absorbed = true;
    h.parent = {3, 3, 4, 4, -1};
    h.node_time = {0.0, 0.0, 0.0, 0.25, 0.75};
    h.subtree_leaves = {1, 1, 1, 2, 3};
    return h;
}

} // namespace

TEST_CASE("kingman first merger times are exponential") {
    CoalescentEngine eng(LambdaModel::kingman());
    eng.warm(3);
    for (std::int32_t n : {2, 3}) {
        const double rate = static_cast<double>(n * (n - 1)) / 2.0;
        std::vector<double> first(4000);
        for (std::size_t rep = 0; rep < first.size(); ++rep) {
            RngStream rng(9, "unit/kingman", rep);
            CoalescentHistory h = eng.simulate(n, StopRule::until_absorption(), rng);
            REQUIRE(!h.events.empty());
            first[rep] = h.events.front().time;
        }
        double d = ks_one_sample(first,
                                 [&](double x) { return exponential_cdf(x, 1.0 / rate); });
        CHECK(d < 0.03);
    }
}

TEST_CASE("history bookkeeping stays consistent") {
    CoalescentEngine eng(LambdaModel::beta(1.5));
    eng.warm(200);
    RngStream rng(10, "unit/history");
    CoalescentHistory h = eng.simulate(200, StopRule::until_absorption(), rng);

    CHECK(h.absorbed);
    CHECK(block_count(h, 0.0) == 200);
    CHECK(block_count(h, h.final_time) == 1);
    CHECK(h.final_time == h.events.back().time);
    CHECK(h.subtree_leaves.back() == 200);

    std::int32_t blocks = 200;
    double last = 0.0;
    for (const MergerEvent& ev : h.events) {
        CHECK(ev.time >= last);
        last = ev.time;
        CHECK(ev.merged.size() >= 2);
        blocks -= static_cast<std::int32_t>(ev.merged.size()) - 1;
        CHECK(ev.blocks_after == blocks);
        CHECK(h.node_time[static_cast<std::size_t>(ev.new_block)] == ev.time);
        std::int32_t leaves = 0;
        for (std::int32_t m : ev.merged) {
            CHECK(h.parent[static_cast<std::size_t>(m)] == ev.new_block);
            leaves += h.subtree_leaves[static_cast<std::size_t>(m)];
        }
        CHECK(h.subtree_leaves[static_cast<std::size_t>(ev.new_block)] == leaves);
    }
    CHECK(blocks == 1);

    // parent walk and event scan agree on the count at generic times
    for (double t : {0.1 * h.final_time, 0.43 * h.final_time, 0.91 * h.final_time}) {
        std::set<std::int32_t> roots;
        std::int32_t mass = 0;
        for (std::int32_t i = 0; i < h.n; ++i)
            roots.insert(block_root(h, i, t));
        for (std::int32_t r : roots)
            mass += h.subtree_leaves[static_cast<std::size_t>(r)];
        CHECK(static_cast<std::int32_t>(roots.size()) == block_count(h, t));
        CHECK(mass == h.n);
        CHECK(frequency_of_one(h, t) ==
              doctest::Approx(static_cast<double>(
                                  h.subtree_leaves[static_cast<std::size_t>(block_root(h, 0, t))]) /
                              200.0));
    }
}

TEST_CASE("stop rule horizons") {
    CoalescentEngine eng(LambdaModel::beta(1.5));
    eng.warm(50);
    RngStream rng(11, "unit/horizon");
    CoalescentHistory h = eng.simulate(50, StopRule::until_time(0.0), rng);
    CHECK(h.events.empty());
    CHECK(h.final_time == 0.0);
    CHECK(!h.absorbed);
    CHECK(block_count(h, 0.0) == 50);
    CHECK_THROWS_AS(block_count(h, 0.5), std::invalid_argument);
    CHECK_THROWS_AS((void)StopRule::until_time(-1.0), std::invalid_argument);

    CoalescentHistory g = eng.simulate(50, StopRule::until_time(0.02), rng);
    for (const MergerEvent& ev : g.events)
        CHECK(ev.time <= 0.02);
    if (!g.absorbed) {
        CHECK(g.final_time == 0.02);
        CHECK_THROWS_AS(block_count(g, 0.03), std::invalid_argument);
    }
}

TEST_CASE("engine warms lazily and refuses cold sizes") {
    CoalescentEngine eng(LambdaModel::beta(1.5));
    CHECK(eng.capacity() == 0);
    RngStream rng(12, "unit/cold");
    CHECK_THROWS_AS(eng.simulate(10, StopRule::until_absorption(), rng), std::logic_error);
    eng.warm(10);
    CHECK(eng.capacity() >= 10);
    CHECK(eng.total_merge_rate(3) == doctest::Approx(total_rate(3, eng.model())).epsilon(1e-12));
    CHECK_THROWS_AS(eng.total_merge_rate(11), std::logic_error);
}

TEST_CASE("merger sizes follow the gamma weights") {
    CoalescentEngine eng(LambdaModel::beta(1.5));
    eng.warm(600);
    RngStream rng(13, "unit/sizes");

    // explicit pmf at five blocks
    double total = total_rate(5, eng.model());
    std::vector<double> freq(6, 0.0);
    const int draws = 40000;
    for (int i = 0; i < draws; ++i)
        freq[static_cast<std::size_t>(eng.merger_size(5, rng))] += 1.0 / draws;
    for (std::int64_t k = 2; k <= 5; ++k) {
        CHECK(std::abs(freq[static_cast<std::size_t>(k)] -
                       gamma_rate(5, k, eng.model()) / total) < 0.01);
    }

    // cached table vs direct mixture at a size beyond the toy range
    std::vector<double> a(20000), b(20000);
    for (std::size_t i = 0; i < a.size(); ++i)
        a[i] = static_cast<double>(eng.merger_size(600, rng));
    for (std::size_t i = 0; i < b.size(); ++i)
        b[i] = static_cast<double>(eng.merger_size_mixture(600, rng));
    CHECK(ks_two_sample(a, b) < 0.025);

    CoalescentEngine king(LambdaModel::kingman());
    king.warm(4);
    for (int i = 0; i < 50; ++i)
        CHECK(king.merger_size(4, rng) == 2);
}

TEST_CASE("ancestor counts of the toy history") {
    CoalescentHistory h = toy_history();

    JumpPath z = extract_Z(h, 1.0, 0);
    CHECK(z.times == (std::vector<double>{0.0, 0.25, 0.75}));
    CHECK(z.values == (std::vector<double>{1.0, 2.0, 3.0}));
    CHECK(z.jump_count() == 2);
    CHECK(z.value_at(0.0) == 1.0);
    CHECK(z.value_at(0.25) == 2.0); // right continuous at the jump
    CHECK(z.value_at(0.55) == 2.0);
    CHECK(z.value_at(0.99) == 3.0);
    CHECK(z.final_value() == 3.0);
    CHECK(z.meta.count("whole_block") == 1);

    // a window that ends between the two mergers sees only the first one
    JumpPath w = extract_Z(h, 0.5, 0);
    CHECK(w.times == (std::vector<double>{0.0, 0.5}));
    CHECK(w.values == (std::vector<double>{1.0, 2.0}));
    CHECK(w.meta.count("whole_block") == 0);

    // label 2 is still a singleton at time 0.5
    JumpPath s = extract_Z(h, 0.5, 2);
    CHECK(s.jump_count() == 0);
    CHECK(s.final_value() == 1.0);

    CHECK_THROWS_AS(extract_Z(h, 0.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(extract_Z(h, 1.0, 3), std::invalid_argument);
    CoalescentHistory open = h;
    open.absorbed = false;
    CHECK_THROWS_AS(extract_Z(open, 0.9, 0), std::invalid_argument);
}

TEST_CASE("ancestor counts agree with the ball counts of the ancestral ball") {
    CoalescentEngine eng(LambdaModel::beta(1.5));
    eng.warm(300);
    RngStream rng(14, "unit/zball");
    CoalescentHistory h = eng.simulate(300, StopRule::until_absorption(), rng);
    const double eps = 0.6 * h.final_time;

    JumpPath z = extract_Z(h, eps, 0);
    CHECK(z.value_at(0.0) == 1.0);
    for (std::size_t i = 1; i < z.values.size(); ++i)
        CHECK(z.values[i] > z.values[i - 1]);
    CHECK(z.final_value() ==
          static_cast<double>(h.subtree_leaves[static_cast<std::size_t>(block_root(h, 0, eps))]));

    Dendrogram ball = evans_space(h, 0, eps);
    ball.validate();
    for (double r : {0.137, 0.419, 0.733}) {
        CHECK(static_cast<double>(ball_count(ball, (1.0 - r) * eps)) == z.value_at(r));
    }

    // the law does not depend on which label is tracked
    JumpPath other = extract_Z(h, eps, 299);
    CHECK(other.value_at(0.0) == 1.0);
}

TEST_CASE("ancestral ball spaces") {
    CoalescentEngine eng(LambdaModel::beta(1.5));
    eng.warm(200);
    RngStream rng(15, "unit/ball");
    CoalescentHistory h = eng.simulate(200, StopRule::until_absorption(), rng);

    Dendrogram whole = evans_space(h, 7, h.final_time);
    whole.validate();
    CHECK(whole.leaf_count == 200);
    CHECK(whole.diameter() == doctest::Approx(h.final_time));
    double mass = 0.0;
    for (double m : whole.mass)
        mass += m;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(whole.leaf_label[static_cast<std::size_t>(whole.point)] == 7);

    double mid = 0.37 * h.final_time;
    Dendrogram ball = evans_space(h, 7, mid);
    ball.validate();
    CHECK(ball.leaf_count ==
          h.subtree_leaves[static_cast<std::size_t>(block_root(h, 7, mid))]);
    for (std::int32_t i = 0; i < ball.leaf_count; ++i)
        CHECK(ball.distance(ball.point, i) <= mid);

    Dendrogram coarse = evans_space(h, 7, h.final_time, 0.3 * h.final_time, 0);
    coarse.validate();
    CHECK(coarse.leaf_count <= whole.leaf_count);
    for (std::int32_t i = 0; i < coarse.leaf_count; ++i)
        for (std::int32_t j = i + 1; j < coarse.leaf_count; ++j)
            CHECK(coarse.distance(i, j) > 0.3 * h.final_time * (1.0 - 1e-12));

    Dendrogram trimmed = evans_space(h, 7, h.final_time, 0.0, 16);
    trimmed.validate();
    CHECK(trimmed.leaf_count <= 16);
    double kept = 0.0;
    for (double m : trimmed.mass)
        kept += m;
    CHECK(kept == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("one-call simulation is replayable") {
    LambdaModel m = LambdaModel::beta(1.7);
    CoalescentHistory a = simulate_coalescent(m, 80, StopRule::until_absorption(), 77, 0);
    CoalescentHistory b = simulate_coalescent(m, 80, StopRule::until_absorption(), 77, 0);
    REQUIRE(a.events.size() == b.events.size());
    for (std::size_t i = 0; i < a.events.size(); ++i) {
        CHECK(a.events[i].time == b.events[i].time);
        CHECK(a.events[i].merged == b.events[i].merged);
    }
    CoalescentHistory c = simulate_coalescent(m, 80, StopRule::until_absorption(), 77, 1);
    CHECK(a.events.front().time != c.events.front().time);
}
