#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nearzero/lambda_model.hpp"
#include "nearzero/numerics.hpp"

using namespace nearzero;

namespace {

// independent oracle: the defining integral against the Beta(2-alpha, alpha)
// density, evaluated by quadrature instead of the gamma-function closed form
double beta_lambda_by_quadrature(std::int64_t n, std::int64_t k, double alpha) {
    const double lb = log_beta(2.0 - alpha, alpha);
    auto f = [&](double p) {
        return std::exp((static_cast<double>(k) - alpha - 1.0) * std::log(p) +
                        (static_cast<double>(n - k) + alpha - 1.0) * std::log1p(-p) - lb);
    };
    return integrate_tanh_sinh(f, 0.0, 1.0, 1e-10).value;
}

double binom(std::int64_t n, std::int64_t k) {
    double v = 1.0;
    for (std::int64_t i = 0; i < k; ++i)
        v = v * static_cast<double>(n - i) / static_cast<double>(i + 1);
    return v;
}

} // namespace

TEST_CASE("kingman rates are pairwise only") {
    LambdaModel m = LambdaModel::kingman();
    CHECK(lambda_rate(3, 2, m) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(lambda_rate(10, 2, m) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(lambda_rate(5, 3, m) == doctest::Approx(0.0));
    CHECK(gamma_rate(4, 2, m) == doctest::Approx(6.0).epsilon(1e-14));
    CHECK(total_rate(6, m) == doctest::Approx(15.0).epsilon(1e-12));
    CHECK(total_rate(1, m) == 0.0);
}

TEST_CASE("beta rates at hand-computed points") {
    LambdaModel m = LambdaModel::beta(1.5);
    // lambda_{3,2} = E[1-p] = alpha/2 and lambda_{3,3} = E[p] = (2-alpha)/2
    CHECK(lambda_rate(3, 2, m) == doctest::Approx(0.75).epsilon(1e-13));
    CHECK(lambda_rate(3, 3, m) == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(gamma_rate(3, 2, m) == doctest::Approx(2.25).epsilon(1e-13));
    CHECK(total_rate(3, m) == doctest::Approx(2.5).epsilon(1e-13));
    // a probability measure always gives lambda_{2,2} = total mass
    CHECK(total_rate(2, m) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(total_rate(1, m) == 0.0);
    CHECK(total_rate(0, m) == 0.0);
    // triple-merger share at three blocks
    CHECK(gamma_rate(3, 3, m) / total_rate(3, m) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(m.a_lambda == doctest::Approx(1.0 / beta_fn(0.5, 1.5)).epsilon(1e-13));
}

TEST_CASE("beta closed form agrees with the defining integral") {
    for (double alpha : {1.2, 1.5, 1.8}) {
        LambdaModel m = LambdaModel::beta(alpha);
        for (auto [n, k] : {std::pair<std::int64_t, std::int64_t>{4, 2},
                            {7, 5},
                            {30, 3}}) {
            double got = lambda_rate(n, k, m);
            double want = beta_lambda_by_quadrature(n, k, alpha);
            CHECK(got == doctest::Approx(want).epsilon(1e-8));
        }
    }
}

TEST_CASE("gamma is the binomial multiple of lambda") {
    LambdaModel m = LambdaModel::beta(1.7);
    for (std::int64_t n : {3, 5, 9}) {
        for (std::int64_t k = 2; k <= n; ++k) {
            CHECK(gamma_rate(n, k, m) ==
                  doctest::Approx(binom(n, k) * lambda_rate(n, k, m)).epsilon(1e-11));
        }
    }
}

TEST_CASE("total rate ladder matches the direct sums") {
    for (const LambdaModel& m : {LambdaModel::kingman(), LambdaModel::beta(1.5)}) {
        TotalRateLadder ladder(m, 12);
        CHECK(ladder.capacity() == 12);
        CHECK(ladder.total(0) == 0.0);
        CHECK(ladder.total(1) == 0.0);
        for (std::int64_t b = 2; b <= 12; ++b) {
            double direct = 0.0;
            for (std::int64_t k = 2; k <= b; ++k)
                direct += gamma_rate(b, k, m);
            CHECK(ladder.total(b) == doctest::Approx(direct).epsilon(1e-10));
            CHECK(ladder.pair_rate(b) == doctest::Approx(lambda_rate(b, 2, m)).epsilon(1e-10));
        }
    }
}

TEST_CASE("block-count speed constant") {
    CHECK(cdi_constant(1.5) ==
          doctest::Approx(1.5 / std::sqrt(std::acos(-1.0))).epsilon(1e-13));
    CHECK_THROWS_AS(cdi_constant(1.0), std::invalid_argument);
    CHECK_THROWS_AS(cdi_constant(2.0), std::invalid_argument);
}

TEST_CASE("limit chain jump rates") {
    LambdaModel b = LambdaModel::beta(1.5);
    // c (i+j) g(j): at i = j = 1 the constants collapse to 4/3
    CHECK(limit_jump_rate(1, 1, 0.0, b) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    // the clock blows up like 1/(1-r)
    CHECK(limit_jump_rate(2, 3, 0.75, b) ==
          doctest::Approx(4.0 * limit_jump_rate(2, 3, 0.0, b)).epsilon(1e-12));

    LambdaModel k = LambdaModel::kingman();
    CHECK(limit_jump_rate(1, 1, 0.0, k) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(limit_jump_rate(4, 1, 0.0, k) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(limit_jump_rate(4, 2, 0.0, k) == doctest::Approx(0.0));
    CHECK_THROWS_AS(limit_jump_rate(0, 1, 0.0, b), std::invalid_argument);
}

TEST_CASE("tabulated density approximates its source") {
    const double alpha = 1.5;
    const double lb = beta_fn(2.0 - alpha, alpha);
    const int M = 2000;
    std::vector<double> density(M);
    for (int m = 1; m <= M; ++m) {
        double p = static_cast<double>(m) / M;
        density[m - 1] = std::pow(p, 1.0 - alpha) * std::pow(1.0 - p, alpha - 1.0) / lb;
    }
    LambdaModel tab = LambdaModel::tabulated(density, alpha, 1.0 / lb);
    LambdaModel ref = LambdaModel::beta(alpha);

    CHECK(tab.head_deviation() < 2e-3);
    CHECK(tab.density_at(0.5) == doctest::Approx(density[M / 2 - 1]).epsilon(1e-12));
    // decreasing density: the interpolated sup sits at the first node
    CHECK(tab.density_sup() == doctest::Approx(density[0]).epsilon(1e-12));

    for (auto [n, k] : {std::pair<std::int64_t, std::int64_t>{5, 3}, {12, 2}}) {
        CHECK(lambda_rate(n, k, tab) ==
              doctest::Approx(lambda_rate(n, k, ref)).epsilon(2e-3));
    }
}
