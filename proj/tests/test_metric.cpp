#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "nearzero/dendrogram.hpp"
#include "nearzero/gromov.hpp"
#include "nearzero/rng.hpp"

using namespace nearzero;

namespace {

Dendrogram random_tree(RngStream& rng, int max_leaves, bool with_mass = false) {
    int leaves = 1 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(max_leaves)));
    if (leaves == 1) {
        Dendrogram d = Dendrogram::single_leaf(with_mass ? 1.0 : -1.0);
        return d;
    }
    std::vector<double> gaps(static_cast<std::size_t>(leaves) - 1);
    for (double& g : gaps)
        g = 0.05 + rng.uniform();
    Dendrogram d = dendrogram_from_linear_gaps(gaps);
    d.point = static_cast<std::int32_t>(rng.uniform_below(static_cast<std::uint64_t>(leaves)));
    if (with_mass) {
        d.mass.assign(static_cast<std::size_t>(leaves), 0.0);
        double total = 0.0;
        for (double& m : d.mass) {
            m = rng.uniform();
            total += m;
        }
        for (double& m : d.mass)
            m /= total;
    }
    d.validate();
    return d;
}

Dendrogram two_leaf(double height, double m0 = -1.0, double m1 = -1.0) {
    Dendrogram d = dendrogram_from_linear_gaps({height});
    if (m0 >= 0.0)
        d.mass = {m0, m1};
    return d;
}

} // namespace

TEST_CASE("linear gap tree realizes max-gap distances") {
    Dendrogram d = dendrogram_from_linear_gaps({1.0, 3.0, 2.0});
    d.validate();
    REQUIRE(d.leaf_count == 4);
    CHECK(d.distance(0, 1) == doctest::Approx(1.0));
    CHECK(d.distance(1, 2) == doctest::Approx(3.0));
    CHECK(d.distance(0, 2) == doctest::Approx(3.0));
    CHECK(d.distance(2, 3) == doctest::Approx(2.0));
    CHECK(d.distance(0, 3) == doctest::Approx(3.0));
    CHECK(d.distance(2, 2) == 0.0);
    CHECK(d.diameter() == doctest::Approx(3.0));
    CHECK(d.node_height(0) == 0.0);
    CHECK(d.node_height(d.root()) == doctest::Approx(3.0));
    d.point = 3;
    CHECK(d.radius_about_point() == doctest::Approx(3.0));
}

TEST_CASE("random trees are ultrametric") {
    RngStream rng(101, "unit");
    for (int rep = 0; rep < 60; ++rep) {
        Dendrogram d = random_tree(rng, 12);
        for (int trial = 0; trial < 40; ++trial) {
            auto pick = [&] {
                return static_cast<std::int32_t>(
                    rng.uniform_below(static_cast<std::uint64_t>(d.leaf_count)));
            };
            std::int32_t i = pick(), j = pick(), k = pick();
            CHECK(d.distance(i, k) <=
                  std::max(d.distance(i, j), d.distance(j, k)) + 1e-15);
            CHECK(d.distance(i, j) == d.distance(j, i));
        }
    }
}

TEST_CASE("closed balls at a radius") {
    Dendrogram d = dendrogram_from_linear_gaps({1.0, 3.0, 2.0});
    CHECK(ball_count(d, 0.0) == 4);
    CHECK(ball_count(d, 0.5) == 4);
    CHECK(ball_count(d, 1.0) == 3); // closed: leaves 0,1 join exactly at 1
    CHECK(ball_count(d, 2.0) == 2);
    CHECK(ball_count(d, 2.9) == 2);
    CHECK(ball_count(d, 3.0) == 1);

    auto pieces = ball_decomposition(d, 2, 1.0);
    REQUIRE(pieces.size() == 3);
    // center's ball first, then by smallest original leaf
    CHECK(pieces[0].leaf_count == 1);
    CHECK(pieces[0].leaf_label == std::vector<std::int64_t>{2});
    CHECK(pieces[1].leaf_label == (std::vector<std::int64_t>{0, 1}));
    CHECK(pieces[2].leaf_label == std::vector<std::int64_t>{3});
    std::int32_t total = 0;
    for (const auto& p : pieces) {
        p.validate();
        total += p.leaf_count;
    }
    CHECK(total == d.leaf_count);
}

TEST_CASE("ball quotient keeps large distances") {
    RngStream rng(102, "unit");
    Dendrogram d = random_tree(rng, 10, true);
    const double eta = 0.4;
    Dendrogram q = space_from_balls(d, eta);
    q.validate();
    CHECK(static_cast<std::int64_t>(q.leaf_count) == ball_count(d, eta));
    double total = 0.0;
    for (double m : q.mass)
        total += m;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    for (std::int32_t i = 0; i < q.leaf_count; ++i)
        for (std::int32_t j = i + 1; j < q.leaf_count; ++j)
            CHECK(q.distance(i, j) > eta);
}

TEST_CASE("mass truncation keeps the point and the mass") {
    RngStream rng(103, "unit");
    for (int rep = 0; rep < 20; ++rep) {
        Dendrogram d = random_tree(rng, 14, true);
        Dendrogram t = truncate_by_mass(d, 4);
        t.validate();
        CHECK(t.leaf_count <= 4);
        CHECK(t.leaf_count <= d.leaf_count);
        double before = 0.0, after = 0.0;
        for (double m : d.mass)
            before += m;
        for (double m : t.mass)
            after += m;
        CHECK(after == doctest::Approx(before).epsilon(1e-12));
        // the distinguished leaf survives; in the pieces it is leaf `point`
        CHECK(t.point >= 0);
        CHECK(t.point < t.leaf_count);
    }
}

TEST_CASE("rescale multiplies every distance") {
    Dendrogram d = dendrogram_from_linear_gaps({1.0, 3.0, 2.0});
    Dendrogram s = rescale(d, 0.25);
    s.validate();
    CHECK(s.distance(1, 2) == doctest::Approx(0.75));
    CHECK(s.diameter() == doctest::Approx(0.75));
    CHECK_THROWS_AS(rescale(d, 0.0), std::invalid_argument);
}

TEST_CASE("serialization round-trips doubles exactly") {
    RngStream rng(104, "unit");
    Dendrogram d = random_tree(rng, 9, true);
    d.leaf_label.assign(static_cast<std::size_t>(d.leaf_count), 0);
    for (auto& l : d.leaf_label)
        l = static_cast<std::int64_t>(rng.next_u64() >> 1);
    Dendrogram back = parse_dendrogram(serialize_dendrogram(d));
    CHECK(back.leaf_count == d.leaf_count);
    CHECK(back.parent == d.parent);
    CHECK(back.height == d.height);
    CHECK(back.mass == d.mass);
    CHECK(back.point == d.point);
    CHECK(back.leaf_label == d.leaf_label);

    std::string file = "test_metric_roundtrip.tree";
    write_dendrogram(d, file);
    Dendrogram from_disk = read_dendrogram(file);
    CHECK(from_disk.height == d.height);
    CHECK(from_disk.mass == d.mass);
    std::remove(file.c_str());
}

TEST_CASE("validate rejects malformed trees") {
    Dendrogram d = dendrogram_from_linear_gaps({1.0, 2.0});
    d.height = {2.0, 1.0}; // heights must not decrease toward the root
    CHECK_THROWS_AS(d.validate(), std::logic_error);
    Dendrogram e = dendrogram_from_linear_gaps({1.0});
    e.point = 5;
    CHECK_THROWS_AS(e.validate(), std::logic_error);
}

TEST_CASE("gh distance on two-point spaces") {
    for (double a : {0.1, 0.35, 0.6, 0.85, 1.1}) {
        for (double b : {0.1, 0.35, 0.6, 0.85, 1.1}) {
            double got = gh_exact(two_leaf(a), two_leaf(b));
            CHECK(got == doctest::Approx(std::abs(a - b) / 2.0).epsilon(1e-12));
        }
        CHECK(gh_exact(Dendrogram::single_leaf(), two_leaf(a)) ==
              doctest::Approx(a / 2.0).epsilon(1e-12));
    }
}

TEST_CASE("gh is symmetric, zero on copies, and a metric on samples") {
    RngStream rng(105, "unit");
    for (int rep = 0; rep < 40; ++rep) {
        Dendrogram x = random_tree(rng, 6);
        Dendrogram y = random_tree(rng, 6);
        Dendrogram z = random_tree(rng, 4);
        double xy = gh_exact(x, y);
        CHECK(gh_exact(y, x) == xy);
        CHECK(gh_exact(x, x) == doctest::Approx(0.0));
        CHECK(gh_exact(x, z) <= xy + gh_exact(y, z) + 1e-12);
    }
    Dendrogram big = dendrogram_from_linear_gaps(std::vector<double>(20, 1.0));
    CHECK_THROWS_AS(gh_exact(big, big), std::invalid_argument);
}

TEST_CASE("gh bounds bracket the exact value") {
    RngStream rng(106, "unit");
    for (int rep = 0; rep < 150; ++rep) {
        Dendrogram x = random_tree(rng, 6);
        Dendrogram y = random_tree(rng, 6);
        double exact = gh_exact(x, y);
        GhBounds b = gh_bounds(x, y);
        CHECK(b.lower <= exact + 1e-12);
        CHECK(b.upper >= exact - 1e-12);
        CHECK(b.lower >= 0.0);
    }
}

TEST_CASE("pointed comparison sums ball mismatches") {
    Dendrogram single = Dendrogram::single_leaf();
    // every integer ball of the pair at distance 1 is the whole pair
    CHECK(pointed_gh(single, two_leaf(1.0)) == doctest::Approx(0.5).epsilon(1e-12));
    // balls agree up to radius 2, then the capped mismatch of 1 remains
    CHECK(pointed_gh(single, two_leaf(3.0)) == doctest::Approx(0.25).epsilon(1e-12));
    RngStream rng(107, "unit");
    for (int rep = 0; rep < 25; ++rep) {
        Dendrogram x = random_tree(rng, 7);
        Dendrogram y = random_tree(rng, 7);
        CHECK(pointed_gh(x, x) == doctest::Approx(0.0));
        CHECK(pointed_gh(x, y) == doctest::Approx(pointed_gh(y, x)).epsilon(1e-12));
        CHECK(pointed_gh(x, y) >= 0.0);
    }
}

TEST_CASE("prokhorov distance between mass assignments") {
    Dendrogram x = two_leaf(1.0, 0.7, 0.3);
    Dendrogram y = two_leaf(1.0, 0.3, 0.7);
    CHECK(prokhorov(x, y) == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(prokhorov(x, x) == doctest::Approx(0.0));
    Dendrogram other = two_leaf(2.0, 0.7, 0.3);
    CHECK_THROWS_AS(prokhorov(x, other), std::invalid_argument);
    Dendrogram bare = two_leaf(1.0);
    CHECK_THROWS_AS(prokhorov(x, bare), std::invalid_argument);
}

TEST_CASE("pointed measured comparison vanishes on copies") {
    RngStream rng(108, "unit");
    for (int rep = 0; rep < 10; ++rep) {
        Dendrogram x = random_tree(rng, 6, true);
        CHECK(pointed_ghp(x, x) == doctest::Approx(0.0).epsilon(1e-9));
        Dendrogram y = random_tree(rng, 6, true);
        CHECK(pointed_ghp(x, y) >= 0.0);
    }
}
