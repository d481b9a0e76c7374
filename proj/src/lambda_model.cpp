#include "nearzero/lambda_model.hpp"

#include "nearzero/errors.hpp"
#include "nearzero/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nearzero {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 1.0) || !(alpha < 2.0))
        throw std::invalid_argument("alpha must lie in (1,2)");
}

void check_merger_args(std::int64_t n, std::int64_t k) {
    if (k < 2 || k > n)
        throw std::invalid_argument("merger size k must satisfy 2 <= k <= n");
}

// Interpolated tabulated density at p in [1/M, 1].
double interp_density(const LambdaModel& m, double p) {
    std::size_t M = m.density.size();
    double grid = p * static_cast<double>(M); // node index m at p = m/M
    if (grid <= 1.0)
        return m.density.front();
    if (grid >= static_cast<double>(M))
        return m.density.back();
    std::size_t lo = static_cast<std::size_t>(grid); // node lo at lo/M
    double frac = grid - static_cast<double>(lo);
    return m.density[lo - 1] * (1.0 - frac) + m.density[lo] * frac;
}

// Integral of the declared head a_lambda p^(1-alpha) times p^(k-2)(1-p)^(n-k)
// over (0, 1/M).
double head_integral(const LambdaModel& m, std::int64_t n, std::int64_t k,
                     double abs_tol) {
    double p1 = 1.0 / static_cast<double>(m.density.size());
    if (m.a_lambda == 0.0)
        return 0.0;
    auto f = [&](double p) {
        return m.a_lambda * std::pow(p, static_cast<double>(k - 2) + 1.0 - m.alpha) *
               std::pow(1.0 - p, static_cast<double>(n - k));
    };
    try {
        return integrate_tanh_sinh(f, 0.0, p1, abs_tol).value;
    } catch (const numeric_error& e) {
        throw numeric_error(std::string("lambda_rate head: ") + e.what(),
                            e.achieved_tolerance());
    }
}

double body_integral(const LambdaModel& m, std::int64_t n, std::int64_t k,
                     double abs_tol) {
    double p1 = 1.0 / static_cast<double>(m.density.size());
    auto f = [&](double p) {
        return interp_density(m, p) * std::pow(p, static_cast<double>(k - 2)) *
               std::pow(1.0 - p, static_cast<double>(n - k));
    };
    try {
        return integrate_adaptive(f, p1, 1.0, abs_tol).value;
    } catch (const numeric_error& e) {
        throw numeric_error(std::string("lambda_rate body: ") + e.what(),
                            e.achieved_tolerance());
    }
}

// Exact integral of (1-p)^(b-2) against the tabulated measure: closed form
// per linear cell plus the head by quadrature.
double tabulated_pair_lambda(const LambdaModel& m, std::int64_t b) {
    std::size_t M = m.density.size();
    double inv_m = 1.0 / static_cast<double>(M);
    double mm = static_cast<double>(b - 2);

    double body = 0.0;
    for (std::size_t cell = 1; cell < M; ++cell) {
        double x0 = static_cast<double>(cell) * inv_m;
        double x1 = static_cast<double>(cell + 1) * inv_m;
        double f0 = m.density[cell - 1];
        double f1 = m.density[cell];
        // density(p) = c + d p on the cell
        double d = (f1 - f0) / (x1 - x0);
        double c = f0 - d * x0;
        double q0 = 1.0 - x0;
        double q1 = 1.0 - x1;
        // integral of q^mm ((c+d) - d q) dq over [q1, q0]
        double i1 = (std::pow(q0, mm + 1.0) - std::pow(q1, mm + 1.0)) / (mm + 1.0);
        double i2 = (std::pow(q0, mm + 2.0) - std::pow(q1, mm + 2.0)) / (mm + 2.0);
        body += (c + d) * i1 - d * i2;
    }

    double head = 0.0;
    if (m.a_lambda > 0.0) {
        auto f = [&](double p) {
            return m.a_lambda * std::pow(p, 1.0 - m.alpha) * std::pow(1.0 - p, mm);
        };
        head = integrate_tanh_sinh(f, 0.0, inv_m, 1e-12).value;
    }
    return head + body;
}

} // namespace

LambdaModel LambdaModel::kingman() {
    LambdaModel m;
    m.kind = LambdaKind::KingmanAtom;
    m.alpha = 2.0;
    m.a_lambda = 0.0;
    m.total_mass = 1.0;
    return m;
}

LambdaModel LambdaModel::beta(double alpha) {
    check_alpha(alpha);
    LambdaModel m;
    m.kind = LambdaKind::Beta;
    m.alpha = alpha;
    m.a_lambda = 1.0 / beta_fn(2.0 - alpha, alpha);
    m.total_mass = 1.0;
    return m;
}

LambdaModel LambdaModel::tabulated(std::vector<double> density, double alpha,
                                   double a_lambda) {
    check_alpha(alpha);
    if (density.size() < 2)
        throw std::invalid_argument("tabulated density needs at least two nodes");
    if (!(a_lambda >= 0.0))
        throw std::invalid_argument("a_lambda must be nonnegative");
    for (double v : density)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("tabulated density values must be finite and nonnegative");

    LambdaModel m;
    m.kind = LambdaKind::TabulatedDensity;
    m.alpha = alpha;
    m.a_lambda = a_lambda;
    m.density = std::move(density);

    // total mass: exact trapezoid over the interpolant plus the head integral
    std::size_t M = m.density.size();
    double inv_m = 1.0 / static_cast<double>(M);
    double body = 0.0;
    for (std::size_t cell = 1; cell < M; ++cell)
        body += 0.5 * (m.density[cell - 1] + m.density[cell]) * inv_m;
    double head = a_lambda * std::pow(inv_m, 2.0 - alpha) / (2.0 - alpha);
    m.total_mass = head + body;
    return m;
}

double LambdaModel::density_sup() const {
    if (kind != LambdaKind::TabulatedDensity)
        throw std::logic_error("density_sup: only defined for tabulated models");
    return *std::max_element(density.begin(), density.end());
}

double LambdaModel::density_at(double p) const {
    if (kind != LambdaKind::TabulatedDensity)
        throw std::logic_error("density_at: only defined for tabulated models");
    if (p <= 0.0 || p > 1.0)
        throw std::invalid_argument("density_at: p must lie in (0,1]");
    double p1 = 1.0 / static_cast<double>(density.size());
    if (p < p1)
        return a_lambda * std::pow(p, 1.0 - alpha);
    return interp_density(*this, p);
}

double LambdaModel::head_deviation(int nodes) const {
    if (kind != LambdaKind::TabulatedDensity)
        throw std::logic_error("head_deviation: only defined for tabulated models");
    if (a_lambda == 0.0)
        return 0.0;
    double worst = 0.0;
    std::size_t M = density.size();
    std::size_t n_check = std::min<std::size_t>(static_cast<std::size_t>(std::max(nodes, 1)), M);
    for (std::size_t i = 0; i < n_check; ++i) {
        double p = static_cast<double>(i + 1) / static_cast<double>(M);
        double expect = a_lambda * std::pow(p, 1.0 - alpha);
        worst = std::max(worst, std::abs(density[i] - expect) / expect);
    }
    return worst;
}

double lambda_rate(std::int64_t n, std::int64_t k, const LambdaModel& model,
                   double abs_tol) {
    check_merger_args(n, k);
    switch (model.kind) {
    case LambdaKind::KingmanAtom:
        return k == 2 ? 1.0 : 0.0;
    case LambdaKind::Beta: {
        double a = model.alpha;
        return std::exp(log_beta(static_cast<double>(k) - a,
                                 static_cast<double>(n - k) + a) -
                        log_beta(2.0 - a, a));
    }
    case LambdaKind::TabulatedDensity:
        return head_integral(model, n, k, 0.5 * abs_tol) +
               body_integral(model, n, k, 0.5 * abs_tol);
    }
    throw std::logic_error("lambda_rate: unknown model kind");
}

double gamma_rate(std::int64_t n, std::int64_t k, const LambdaModel& model,
                  double abs_tol) {
    check_merger_args(n, k);
    double log_choose = log_binomial(n, k);
    if (model.kind == LambdaKind::Beta) {
        double a = model.alpha;
        double v = std::exp(log_choose +
                            log_beta(static_cast<double>(k) - a,
                                     static_cast<double>(n - k) + a) -
                            log_beta(2.0 - a, a));
        if (!std::isfinite(v))
            throw numeric_error("gamma_rate: value overflowed", 0.0);
        return v;
    }
    double lam = lambda_rate(n, k, model, abs_tol);
    if (lam == 0.0)
        return 0.0;
    double v = std::exp(log_choose + std::log(lam));
    if (!std::isfinite(v))
        throw numeric_error("gamma_rate: value overflowed", 0.0);
    return v;
}

double pair_lambda(std::int64_t b, const LambdaModel& model) {
    if (b < 2)
        throw std::invalid_argument("pair_lambda: need b >= 2");
    switch (model.kind) {
    case LambdaKind::KingmanAtom:
        return 1.0;
    case LambdaKind::Beta: {
        double a = model.alpha;
        return std::exp(log_beta(2.0 - a, static_cast<double>(b - 2) + a) -
                        log_beta(2.0 - a, a));
    }
    case LambdaKind::TabulatedDensity:
        return tabulated_pair_lambda(model, b);
    }
    throw std::logic_error("pair_lambda: unknown model kind");
}

double total_rate(std::int64_t n, const LambdaModel& model) {
    if (n <= 1)
        return 0.0;
    if (model.kind == LambdaKind::KingmanAtom)
        return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    // R(b+1) = R(b) + b * lambda_{b+1,2}, starting from R(2) = total mass
    double r = model.kind == LambdaKind::Beta ? 1.0 : model.total_mass;
    for (std::int64_t b = 2; b < n; ++b)
        r += static_cast<double>(b) * pair_lambda(b + 1, model);
    return r;
}

double cdi_constant(double alpha) {
    check_alpha(alpha);
    return alpha / gamma_fn(2.0 - alpha);
}

double limit_jump_rate(std::int64_t i, std::int64_t j, double r,
                       const LambdaModel& model) {
    if (i < 1 || j < 1)
        throw std::invalid_argument("limit_jump_rate: need i >= 1 and j >= 1");
    if (!(r >= 0.0) || r >= 1.0)
        throw std::invalid_argument("limit_jump_rate: need r in [0,1)");
    double a = model.alpha;
    if (a == 2.0)
        return j == 1 ? static_cast<double>(i + 1) / (1.0 - r) : 0.0;
    double ij = static_cast<double>(i + j);
    return model.a_lambda * ij *
           std::exp(log_gamma(2.0 - a) + log_gamma(static_cast<double>(j) - a + 1.0) -
                    log_gamma(static_cast<double>(j) + 2.0)) /
           ((1.0 - r) * a);
}

TotalRateLadder::TotalRateLadder(const LambdaModel& model, std::int64_t n_max) {
    if (n_max < 2)
        throw std::invalid_argument("TotalRateLadder: need n_max >= 2");
    total_.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    pair_.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    if (model.kind == LambdaKind::KingmanAtom) {
        for (std::int64_t b = 2; b <= n_max; ++b) {
            pair_[static_cast<std::size_t>(b)] = 1.0;
            total_[static_cast<std::size_t>(b)] =
                0.5 * static_cast<double>(b) * static_cast<double>(b - 1);
        }
        return;
    }
    pair_[2] = model.kind == LambdaKind::Beta ? 1.0 : model.total_mass;
    total_[2] = pair_[2];
    for (std::int64_t b = 3; b <= n_max; ++b) {
        pair_[static_cast<std::size_t>(b)] = pair_lambda(b, model);
        total_[static_cast<std::size_t>(b)] =
            total_[static_cast<std::size_t>(b - 1)] +
            static_cast<double>(b - 1) * pair_[static_cast<std::size_t>(b)];
    }
}

double TotalRateLadder::total(std::int64_t b) const {
    if (b <= 1)
        return 0.0;
    if (b >= static_cast<std::int64_t>(total_.size()))
        throw std::invalid_argument("TotalRateLadder: block count beyond capacity");
    return total_[static_cast<std::size_t>(b)];
}

double TotalRateLadder::pair_rate(std::int64_t b) const {
    if (b < 2 || b >= static_cast<std::int64_t>(pair_.size()))
        throw std::invalid_argument("TotalRateLadder: block count out of range");
    return pair_[static_cast<std::size_t>(b)];
}

} // namespace nearzero
