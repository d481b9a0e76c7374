#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "nearzero/errors.hpp"
#include "nearzero/numerics.hpp"
#include "nearzero/rng.hpp"
#include "nearzero/stats.hpp"

using namespace nearzero;

TEST_CASE("philox known answers") {
    // standard vectors for philox4x32-10
    auto zero = philox4x32({0u, 0u, 0u, 0u}, {0u, 0u});
    CHECK(zero[0] == 0x6627e8d5u);
    CHECK(zero[1] == 0xe169c58du);
    CHECK(zero[2] == 0xbc57ac4cu);
    CHECK(zero[3] == 0x9b00dbd8u);

    auto ones = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                           {0xffffffffu, 0xffffffffu});
    CHECK(ones[0] == 0x408f276du);
    CHECK(ones[1] == 0x41c83b0eu);
    CHECK(ones[2] == 0xa20bc7c6u);
    CHECK(ones[3] == 0x6d5451fdu);

    auto pi = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                         {0xa4093822u, 0x299f31d0u});
    CHECK(pi[0] == 0xd16cfe09u);
    CHECK(pi[1] == 0x94fdccebu);
    CHECK(pi[2] == 0x5001e420u);
    CHECK(pi[3] == 0x24126ea1u);
}

TEST_CASE("rng streams are keyed by seed, tag and replica") {
    RngStream a(42, "unit", 0);
    RngStream b(42, "unit", 0);
    for (int i = 0; i < 16; ++i)
        CHECK(a.next_u64() == b.next_u64());

    RngStream c(42, "unit", 1);
    RngStream d(42, "other", 0);
    RngStream e(43, "unit", 0);
    RngStream f(42, "unit", 0);
    int same_c = 0, same_d = 0, same_e = 0;
    for (int i = 0; i < 16; ++i) {
        std::uint64_t x = f.next_u64();
        same_c += x == c.next_u64();
        same_d += x == d.next_u64();
        same_e += x == e.next_u64();
    }
    CHECK(same_c == 0);
    CHECK(same_d == 0);
    CHECK(same_e == 0);
}

TEST_CASE("uniform stays inside the open interval") {
    RngStream rng(7, "unit");
    for (int i = 0; i < 200000; ++i) {
        double u = rng.uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("uniform_below covers the range without bias") {
    RngStream rng(7, "unit");
    std::vector<std::int64_t> hits(5, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        ++hits[rng.uniform_below(5)];
    for (std::int64_t h : hits)
        CHECK(std::abs(static_cast<double>(h) / n - 0.2) < 0.006);
    CHECK(rng.uniform_below(1) == 0);
}

TEST_CASE("sampler moments match their laws") {
    RngStream rng(11, "unit");
    const int n = 200000;

    double se = 0.0, se2 = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = rng.exponential(2.0);
        se += x;
        se2 += x * x;
    }
    CHECK(se / n == doctest::Approx(0.5).epsilon(0.02));
    CHECK(se2 / n == doctest::Approx(0.5).epsilon(0.05));

    double sn = 0.0, sn2 = 0.0, sn4 = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = rng.normal();
        sn += x;
        sn2 += x * x;
        sn4 += x * x * x * x;
    }
    CHECK(std::abs(sn / n) < 0.01);
    CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(sn4 / n == doctest::Approx(3.0).epsilon(0.05));

    // small and large means exercise the two poisson branches
    for (double mean : {0.7, 45.0}) {
        double sp = 0.0, sp2 = 0.0;
        for (int i = 0; i < 50000; ++i) {
            double x = static_cast<double>(rng.poisson(mean));
            sp += x;
            sp2 += x * x;
        }
        double m = sp / 50000;
        CHECK(m == doctest::Approx(mean).epsilon(0.03));
        CHECK(sp2 / 50000 - m * m == doctest::Approx(mean).epsilon(0.06));
    }
    CHECK(rng.poisson(0.0) == 0);
}

TEST_CASE("alias table reproduces its weights") {
    RngStream rng(3, "unit");
    std::vector<double> w = {0.5, 3.0, 1.0, 0.01, 2.49};
    double total = 7.0;
    AliasTable table(w);
    REQUIRE(table.size() == w.size());
    std::vector<double> hits(w.size(), 0.0);
    const int n = 400000;
    for (int i = 0; i < n; ++i)
        hits[table.sample(rng)] += 1.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        CHECK(std::abs(hits[i] / n - w[i] / total) < 0.004);
}

TEST_CASE("gamma and beta specials") {
    CHECK(gamma_fn(0.5) == doctest::Approx(std::sqrt(std::acos(-1.0))).epsilon(1e-14));
    CHECK(gamma_fn(5.0) == doctest::Approx(24.0).epsilon(1e-14));
    CHECK(gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(log_gamma(10.5) == doctest::Approx(std::lgamma(10.5)).epsilon(1e-13));
    // B(a,b) = Gamma(a)Gamma(b)/Gamma(a+b)
    CHECK(beta_fn(0.5, 1.5) == doctest::Approx(std::acos(-1.0) / 2.0).epsilon(1e-13));
    CHECK(beta_fn(2.0, 3.0) == doctest::Approx(1.0 / 12.0).epsilon(1e-13));
    CHECK(std::exp(log_binomial(10, 3)) == doctest::Approx(120.0).epsilon(1e-12));
    CHECK(std::exp(log_binomial(52, 26)) ==
          doctest::Approx(495918532948104.0).epsilon(1e-11));
}

TEST_CASE("reference cdfs") {
    CHECK(gamma2_cdf(0.0, 2.0) == 0.0);
    CHECK(gamma2_cdf(4.0, 2.0) ==
          doctest::Approx(1.0 - std::exp(-2.0) * 3.0).epsilon(1e-14));
    CHECK(exponential_cdf(2.0, 2.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
    CHECK(exponential_cdf(0.0, 1.0) == 0.0);

    for (double a : {0.5, 1.0, 3.7}) {
        for (double x : {0.1, 1.0, 6.0}) {
            CHECK(regularized_gamma_p(a, x) + regularized_gamma_q(a, x) ==
                  doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    // df = 2 gives an exponential tail exactly
    CHECK(chi_square_pvalue(2.0, 2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(chi_square_pvalue(0.0, 5) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tanh-sinh quadrature handles endpoint singularities") {
    auto r = integrate_tanh_sinh([](double p) { return 1.0 / std::sqrt(p); }, 0.0, 1.0, 1e-11);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(r.abs_error <= 1e-11);
    CHECK(r.evaluations > 0);

    auto b = integrate_tanh_sinh(
        [](double p) { return std::pow(p, -0.5) * std::pow(1.0 - p, -0.3); }, 0.0, 1.0, 1e-11);
    CHECK(b.value == doctest::Approx(beta_fn(0.5, 0.7)).epsilon(1e-9));

    CHECK_THROWS_AS(integrate_tanh_sinh([](double p) { return std::sin(50.0 * p); }, 0.0, 3.0,
                                        1e-15, 2),
                    numeric_error);
}

TEST_CASE("adaptive simpson on a smooth integrand") {
    auto r = integrate_adaptive([](double x) { return std::sin(x); }, 0.0, std::acos(-1.0),
                                1e-10);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("fft round trip") {
    RngStream rng(5, "unit");
    std::vector<std::complex<double>> a(64), orig;
    for (auto& z : a)
        z = {rng.uniform_signed(), rng.uniform_signed()};
    orig = a;
    fft_inplace(a, false);
    fft_inplace(a, true);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(std::abs(a[i] - orig[i]) < 1e-12);
    std::vector<std::complex<double>> bad(6);
    CHECK_THROWS_AS(fft_inplace(bad, false), std::invalid_argument);
}

TEST_CASE("ks statistics on hand-checkable samples") {
    // samples at (i - 1/2)/n against the uniform cdf leave exactly 1/(2n)
    std::vector<double> grid;
    for (int i = 1; i <= 20; ++i)
        grid.push_back((i - 0.5) / 20.0);
    double d = ks_one_sample(grid, [](double x) { return x; });
    CHECK(d == doctest::Approx(0.025).epsilon(1e-12));

    CHECK(ks_one_sample({0.5}, [](double x) { return x; }) == doctest::Approx(0.5));

    std::vector<double> a = {1.0, 2.0, 3.0};
    CHECK(ks_two_sample(a, a) == doctest::Approx(0.0));
    CHECK(ks_two_sample({0.0, 1.0}, {5.0, 6.0}) == doctest::Approx(1.0));
    // ties across samples must not double count
    CHECK(ks_two_sample({1.0, 2.0}, {2.0, 3.0}) == doctest::Approx(0.5));
}

TEST_CASE("wasserstein and total variation basics") {
    CHECK(wasserstein1({0.0}, {1.0}) == doctest::Approx(1.0));
    CHECK(wasserstein1({0.0, 1.0}, {0.5, 1.5}) == doctest::Approx(0.5));
    CHECK(wasserstein1({0.0, 0.0}, {0.0, 2.0}) == doctest::Approx(1.0));

    CHECK(total_variation({0.5, 0.5}, {0.5, 0.5}) == doctest::Approx(0.0));
    CHECK(total_variation({1.0, 0.0}, {0.0, 1.0}) == doctest::Approx(1.0));
    CHECK(total_variation({0.7, 0.3}, {0.5, 0.5}) == doctest::Approx(0.2));
}

TEST_CASE("poisson gof separates the right and wrong mean") {
    RngStream rng(17, "unit");
    std::vector<std::int64_t> counts(4000);
    for (auto& c : counts)
        c = rng.poisson(3.0);
    GofResult good = poisson_gof(counts, 3.0);
    CHECK(good.p_value > 1e-4);
    CHECK(good.df >= 1);
    GofResult bad = poisson_gof(counts, 3.8);
    CHECK(bad.p_value < 1e-8);
}

TEST_CASE("summary statistics") {
    CHECK(sample_mean({1.0, 2.0, 6.0}) == doctest::Approx(3.0));
    CHECK(sample_variance({1.0, 2.0, 3.0}) == doctest::Approx(1.0));
    CHECK(sample_median({5.0, 1.0, 3.0}) == doctest::Approx(3.0));
    CHECK(sample_median({4.0, 1.0, 3.0, 2.0}) == doctest::Approx(2.5));
}

TEST_CASE("empirical pmf buckets positive integers with an overflow slot") {
    std::vector<double> pmf = empirical_pmf({1, 2, 2, 7}, 3);
    REQUIRE(pmf.size() == 4);
    CHECK(pmf[0] == doctest::Approx(0.25));
    CHECK(pmf[1] == doctest::Approx(0.5));
    CHECK(pmf[2] == doctest::Approx(0.0));
    CHECK(pmf[3] == doctest::Approx(0.25));
}
