#include "nearzero/limit_process.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "nearzero/errors.hpp"
#include "nearzero/numerics.hpp"

namespace nearzero {

namespace {

void check_alpha_range(double alpha) {
    if (!(alpha > 1.0) || !(alpha <= 2.0))
        throw std::invalid_argument("alpha must lie in (1,2]");
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n)
        p <<= 1;
    return p;
}

} // namespace

double spine_g(double alpha, std::int64_t j) {
    check_alpha_range(alpha);
    if (j < 1)
        throw std::invalid_argument("spine_g: jump size must be at least 1");
    if (alpha == 2.0)
        return j == 1 ? 1.0 : 0.0;
    return std::exp(log_gamma(static_cast<double>(j) + 1.0 - alpha) -
                    log_gamma(static_cast<double>(j) + 2.0));
}

double spine_g_total(double alpha) {
    check_alpha_range(alpha);
    if (alpha == 2.0)
        return 1.0;
    return gamma_fn(2.0 - alpha) / alpha;
}

double spine_g_first_moment(double alpha) {
    check_alpha_range(alpha);
    if (alpha == 2.0)
        return 1.0;
    return gamma_fn(2.0 - alpha) / (alpha * (alpha - 1.0));
}

double offspring_tail(double alpha, std::int64_t from) {
    check_alpha_range(alpha);
    if (from < 1)
        throw std::invalid_argument("offspring_tail: from must be at least 1");
    if (alpha == 2.0)
        return from <= 1 ? 1.0 : 0.0;
    // sum_{j>=J} g(j) = Gamma(J+1-alpha) / (alpha Gamma(J+1)), divided by G
    double J = static_cast<double>(from);
    return std::exp(log_gamma(J + 1.0 - alpha) - log_gamma(J + 1.0) -
                    log_gamma(2.0 - alpha));
}

double immigrant_tail(double alpha, std::int64_t from) {
    check_alpha_range(alpha);
    if (from < 1)
        throw std::invalid_argument("immigrant_tail: from must be at least 1");
    if (alpha == 2.0)
        return from <= 1 ? 1.0 : 0.0;
    // sum_{j>=J} j g(j) = Gamma(J+1-alpha) [J/(alpha-1) - 1/alpha] / Gamma(J+1)
    double J = static_cast<double>(from);
    double base = std::exp(log_gamma(J + 1.0 - alpha) - log_gamma(J + 1.0) -
                           log_gamma(2.0 - alpha));
    return base * (alpha * J - alpha + 1.0);
}

namespace {

std::vector<double> offspring_table(double alpha, std::int64_t k_max) {
    std::vector<double> p(static_cast<std::size_t>(k_max), 0.0);
    if (alpha == 2.0) {
        p[0] = 1.0;
        return p;
    }
    p[0] = alpha / 2.0; // g(1)/G with g(1) = Gamma(2-alpha)/2
    for (std::int64_t j = 1; j < k_max; ++j)
        p[static_cast<std::size_t>(j)] = p[static_cast<std::size_t>(j) - 1] *
                                         (static_cast<double>(j) + 1.0 - alpha) /
                                         (static_cast<double>(j) + 2.0);
    return p;
}

[[noreturn]] void reject_truncation(const char* who, double tail, double tail_tol,
                                    double k_trunc, double decay) {
    // tail ~ k^(-decay), so scale the current size by (tail/tol)^(1/decay)
    double need = std::ceil(k_trunc * std::pow(tail / tail_tol, 1.0 / decay));
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "%s: tail mass %.3g at k_trunc %.0f exceeds %.3g; need about %.3g",
                  who, tail, k_trunc, tail_tol, need);
    throw std::invalid_argument(buf);
}

} // namespace

OffspringDist offspring_pmf(double alpha, std::int64_t k_trunc, double tail_tol) {
    check_alpha_range(alpha);
    if (k_trunc < 1)
        throw std::invalid_argument("offspring_pmf: k_trunc must be at least 1");
    OffspringDist d;
    d.alpha = alpha;
    d.tail_mass = offspring_tail(alpha, k_trunc + 1);
    d.normalizer = alpha == 2.0 ? 1.0 : spine_g_total(alpha);
    if (d.tail_mass > tail_tol)
        reject_truncation("offspring_pmf", d.tail_mass, tail_tol,
                          static_cast<double>(k_trunc), alpha);
    d.pmf = offspring_table(alpha, k_trunc);
    return d;
}

OffspringDist immigrant_pmf(double alpha, std::int64_t k_trunc, double tail_tol) {
    check_alpha_range(alpha);
    if (k_trunc < 1)
        throw std::invalid_argument("immigrant_pmf: k_trunc must be at least 1");
    OffspringDist d;
    d.alpha = alpha;
    d.tail_mass = immigrant_tail(alpha, k_trunc + 1);
    d.normalizer = alpha == 2.0 ? 1.0 : spine_g_first_moment(alpha);
    if (d.tail_mass > tail_tol)
        reject_truncation("immigrant_pmf", d.tail_mass, tail_tol,
                          static_cast<double>(k_trunc), alpha - 1.0);
    d.pmf = offspring_table(alpha, k_trunc);
    if (alpha < 2.0)
        for (std::int64_t j = 1; j <= k_trunc; ++j)
            d.pmf[static_cast<std::size_t>(j) - 1] *=
                static_cast<double>(j) * (alpha - 1.0); // j g(j)/G1 = j (alpha-1) g(j)/G
    return d;
}

ZSimulator::ZSimulator(double alpha, double a_lambda, std::int64_t table_size)
    : alpha_(alpha) {
    check_alpha_range(alpha);
    if (alpha_ == 2.0)
        return; // unit jumps, c = G = G1 = 1
    if (!(a_lambda > 0.0))
        throw std::invalid_argument("ZSimulator: a_lambda must be positive");
    if (table_size < 1)
        throw std::invalid_argument("ZSimulator: table_size must be at least 1");
    g_total_ = spine_g_total(alpha_);
    g_first_ = spine_g_first_moment(alpha_);
    c_ = a_lambda * gamma_fn(2.0 - alpha_) / alpha_;
    table_size_ = table_size;

    std::vector<double> g(static_cast<std::size_t>(table_size));
    g[0] = gamma_fn(2.0 - alpha_) / 2.0;
    for (std::int64_t j = 1; j < table_size; ++j)
        g[static_cast<std::size_t>(j)] = g[static_cast<std::size_t>(j) - 1] *
                                         (static_cast<double>(j) + 1.0 - alpha_) /
                                         (static_cast<double>(j) + 2.0);
    line_table_ = AliasTable(g);
    std::vector<double> jg(g);
    for (std::int64_t j = 0; j < table_size; ++j)
        jg[static_cast<std::size_t>(j)] *= static_cast<double>(j + 1);
    imm_table_ = AliasTable(jg);
    line_tail_ = offspring_tail(alpha_, table_size + 1);
    imm_tail_ = immigrant_tail(alpha_, table_size + 1);
}

double ZSimulator::exit_rate(std::int64_t i) const {
    if (i < 1)
        throw std::invalid_argument("exit_rate: state must be at least 1");
    return c_ * (static_cast<double>(i) * g_total_ + g_first_);
}

double ZSimulator::jump_rate(std::int64_t i, std::int64_t j, double r) const {
    if (i < 1 || j < 1)
        throw std::invalid_argument("jump_rate: state and jump must be at least 1");
    if (!(r >= 0.0) || r >= 1.0)
        throw std::invalid_argument("jump_rate: time must lie in [0,1)");
    return c_ * static_cast<double>(i + j) * spine_g(alpha_, j) / (1.0 - r);
}

std::int64_t ZSimulator::tail_sample(bool immigrant, RngStream& rng) const {
    std::int64_t j = table_size_ + 1;
    double J = static_cast<double>(j);
    double g = std::exp(log_gamma(J + 1.0 - alpha_) - log_gamma(J + 2.0));
    double line_total = std::exp(log_gamma(J + 1.0 - alpha_) - log_gamma(J + 1.0)) / alpha_;
    double total = immigrant
                       ? std::exp(log_gamma(J + 1.0 - alpha_) - log_gamma(J)) /
                                 (alpha_ - 1.0) -
                             line_total
                       : line_total;
    double target = rng.uniform() * total;
    double cum = immigrant ? static_cast<double>(j) * g : g;
    while (cum < target) {
        g *= (static_cast<double>(j) + 1.0 - alpha_) / (static_cast<double>(j) + 2.0);
        ++j;
        cum += immigrant ? static_cast<double>(j) * g : g;
        if (g < total * 1e-18)
            break; // accumulated rounding; the remaining mass is negligible
    }
    return j;
}

std::int64_t ZSimulator::sample_jump(std::int64_t i, RngStream& rng) const {
    if (i < 1)
        throw std::invalid_argument("sample_jump: state must be at least 1");
    if (alpha_ == 2.0)
        return 1;
    double w_line = static_cast<double>(i) * g_total_;
    bool line = rng.uniform() * (w_line + g_first_) < w_line;
    double tail = line ? line_tail_ : imm_tail_;
    if (rng.uniform() < tail)
        return tail_sample(!line, rng);
    const AliasTable& table = line ? line_table_ : imm_table_;
    return static_cast<std::int64_t>(table.sample(rng)) + 1;
}

JumpPath ZSimulator::simulate(double r_max, RngStream& rng,
                              std::int64_t max_jumps) const {
    if (!(r_max >= 0.0) || r_max >= 1.0)
        throw std::invalid_argument("simulate_Z: r_max must lie in [0,1)");
    JumpPath z;
    z.times.push_back(0.0);
    z.values.push_back(1.0);
    double r = 0.0;
    std::int64_t i = 1;
    for (std::int64_t jumps = 0;; ++jumps) {
        if (jumps >= max_jumps)
            throw resource_error("simulate_Z: jump budget exhausted");
        double kappa = exit_rate(i);
        double rn = 1.0 - (1.0 - r) * std::pow(rng.uniform(), 1.0 / kappa);
        if (rn >= r_max)
            break;
        i += sample_jump(i, rng);
        z.times.push_back(rn);
        z.values.push_back(static_cast<double>(i));
        r = rn;
    }
    z.meta["alpha"] = format_double(alpha_);
    z.meta["r_max"] = format_double(r_max);
    return z;
}

std::int64_t ZSimulator::marginal_absorbed(double r, std::int64_t cap,
                                           RngStream& rng) const {
    if (!(r >= 0.0) || r >= 1.0)
        throw std::invalid_argument("marginal_absorbed: time must lie in [0,1)");
    if (cap < 1)
        throw std::invalid_argument("marginal_absorbed: cap must be at least 1");
    double cur = 0.0;
    std::int64_t i = 1;
    while (i < cap) {
        double kappa = exit_rate(i);
        double rn = 1.0 - (1.0 - cur) * std::pow(rng.uniform(), 1.0 / kappa);
        if (rn >= r)
            return i;
        i += sample_jump(i, rng);
        cur = rn;
    }
    return cap;
}

JumpPath simulate_Z(double alpha, double a_lambda, double r_max, RngStream& rng,
                    std::int64_t max_jumps) {
    ZSimulator sim(alpha, a_lambda);
    return sim.simulate(r_max, rng, max_jumps);
}

JumpPath simulate_Z_thinning(double alpha, double a_lambda, double r_max,
                             RngStream& rng, std::int64_t max_jumps) {
    if (!(r_max >= 0.0) || r_max >= 1.0)
        throw std::invalid_argument("simulate_Z: r_max must lie in [0,1)");
    ZSimulator sim(alpha, a_lambda);
    JumpPath z;
    z.times.push_back(0.0);
    z.values.push_back(1.0);
    double r = 0.0;
    std::int64_t i = 1;
    std::int64_t budget = max_jumps;
    while (true) {
        // proposals at the sup of the rate over (r, r_max]
        double bound = sim.exit_rate(i) / (1.0 - r_max);
        double rn = r + rng.exponential(bound);
        if (rn >= r_max)
            break;
        if (--budget < 0)
            throw resource_error("simulate_Z: jump budget exhausted");
        double accept = (1.0 - r_max) / (1.0 - rn);
        r = rn;
        if (rng.uniform() >= accept)
            continue;
        i += sim.sample_jump(i, rng);
        z.times.push_back(rn);
        z.values.push_back(static_cast<double>(i));
    }
    z.meta["alpha"] = format_double(alpha);
    z.meta["r_max"] = format_double(r_max);
    return z;
}

MarginalZ marginal_Z_oracle(double alpha, double a_lambda, double r,
                            std::int64_t m_trunc, double leak_tol) {
    check_alpha_range(alpha);
    if (!(r >= 0.0) || r >= 1.0)
        throw std::invalid_argument("marginal_Z_oracle: time must lie in [0,1)");
    if (m_trunc < 2 || m_trunc > (1 << 20))
        throw std::invalid_argument("marginal_Z_oracle: truncation out of range");

    std::size_t M = static_cast<std::size_t>(m_trunc);
    double c, G, G1;
    std::vector<double> g(M - 1, 0.0); // jump weights g(1)..g(M-1)
    if (alpha == 2.0) {
        c = G = G1 = 1.0;
        g[0] = 1.0;
    } else {
        if (!(a_lambda > 0.0))
            throw std::invalid_argument("marginal_Z_oracle: a_lambda must be positive");
        c = a_lambda * gamma_fn(2.0 - alpha) / alpha;
        G = spine_g_total(alpha);
        G1 = spine_g_first_moment(alpha);
        g[0] = gamma_fn(2.0 - alpha) / 2.0;
        for (std::size_t j = 1; j < M - 1; ++j)
            g[j] = g[j - 1] * (static_cast<double>(j) + 1.0 - alpha) /
                   (static_cast<double>(j) + 2.0);
    }

    double s = -std::log1p(-r);
    std::vector<double> v(M, 0.0), res(M, 0.0);
    v[0] = 1.0; // state 1
    double lam = c * (static_cast<double>(m_trunc) * G + G1);
    double ls = lam * s;
    if (ls == 0.0) {
        return {v, 0.0};
    }
    std::int64_t m_max =
        static_cast<std::int64_t>(std::ceil(ls + 10.0 * std::sqrt(ls) + 40.0));

    // frequency response of the jump kernel, reused across applications
    std::size_t pad = next_pow2(2 * M);
    std::vector<std::complex<double>> g_hat(pad, 0.0);
    bool use_fft = alpha != 2.0;
    if (use_fft) {
        for (std::size_t j = 0; j < M - 1; ++j)
            g_hat[j] = g[j];
        fft_inplace(g_hat, false);
    }

    std::vector<std::complex<double>> work(pad);
    std::vector<double> inflow(M, 0.0);
    double log_ls = std::log(ls);
    for (std::int64_t m = 0; m <= m_max; ++m) {
        double w = std::exp(-ls + static_cast<double>(m) * log_ls -
                            log_gamma(static_cast<double>(m) + 1.0));
        for (std::size_t k = 0; k < M; ++k)
            res[k] += w * v[k];

        if (m == m_max)
            break;
        if (use_fft) {
            std::fill(work.begin(), work.end(), std::complex<double>(0.0, 0.0));
            for (std::size_t k = 0; k < M; ++k)
                work[k] = v[k];
            fft_inplace(work, false);
            for (std::size_t k = 0; k < pad; ++k)
                work[k] *= g_hat[k];
            fft_inplace(work, true);
            // conv[k] pairs state x = k1+1 with jump j = k2+1, so y = k+2
            for (std::size_t y = 2; y <= M; ++y)
                inflow[y - 1] = std::max(0.0, work[y - 2].real());
        } else {
            for (std::size_t y = M; y >= 2; --y)
                inflow[y - 1] = v[y - 2];
        }
        for (std::size_t k = 0; k < M; ++k) {
            double state = static_cast<double>(k + 1);
            double kappa = c * (state * G + G1);
            v[k] = v[k] * (1.0 - kappa / lam) +
                   (c * state / lam) * (k >= 1 ? inflow[k] : 0.0);
        }
    }

    double total = std::accumulate(res.begin(), res.end(), 0.0);
    MarginalZ out{std::move(res), 1.0 - total};
    if (out.leak > leak_tol)
        throw numeric_error(
            "marginal_Z_oracle: mass beyond the truncation exceeds the tolerance; "
            "raise m_trunc or leak_tol",
            out.leak);
    return out;
}

std::int64_t LimitTree::particles() const {
    std::int64_t count = initial;
    for (const Birth& b : births)
        count += b.count;
    return count;
}

LimitTree limit_tree_events(const JumpPath& z, double eta, RngStream& rng) {
    if (!(eta > 0.0) || eta >= 1.0)
        throw std::invalid_argument("limit_tree_events: eta must lie in (0,1)");
    if (z.times.empty() || z.times.front() != 0.0)
        throw std::invalid_argument("limit_tree_events: path must start at time 0");
    double r_cut = 1.0 - eta;

    LimitTree t;
    t.eta = eta;
    t.initial = std::llround(z.values.front());
    if (t.initial < 1)
        throw std::invalid_argument("limit_tree_events: block counts must be positive");

    std::int64_t count = t.initial;
    for (std::size_t k = 1; k < z.times.size(); ++k) {
        if (z.times[k] > r_cut)
            break;
        std::int64_t j = std::llround(z.values[k]) - count;
        if (j < 1)
            throw std::invalid_argument("limit_tree_events: path must be increasing");
        // block ids are created in birth order, so a uniform index below the
        // running count addresses a uniformly random live block
        t.births.push_back({z.times[k],
                            static_cast<std::int64_t>(
                                rng.uniform_below(static_cast<std::uint64_t>(count))),
                            j});
        count += j;
    }
    return t;
}

Dendrogram dendrogram_from_limit_tree(const LimitTree& t) {
    std::int64_t total = t.particles();
    if (t.initial < 1)
        throw std::invalid_argument("limit_tree: block counts must be positive");
    if (total > (std::int64_t{1} << 30))
        throw resource_error("limit_tree: too many blocks for a dendrogram");
    std::int32_t leaves = static_cast<std::int32_t>(total);
    if (leaves == 1)
        return Dendrogram::single_leaf(1.0);

    Dendrogram d;
    d.leaf_count = leaves;
    d.parent.assign(static_cast<std::size_t>(leaves), -1);
    d.mass.assign(static_cast<std::size_t>(leaves), 1.0 / static_cast<double>(leaves));
    d.point = 0;

    std::vector<std::int32_t> dsu(static_cast<std::size_t>(leaves));
    std::iota(dsu.begin(), dsu.end(), 0);
    std::vector<std::int32_t> node_of(static_cast<std::size_t>(leaves));
    std::iota(node_of.begin(), node_of.end(), 0);
    auto find = [&](std::int32_t x) {
        while (dsu[static_cast<std::size_t>(x)] != x) {
            dsu[static_cast<std::size_t>(x)] =
                dsu[static_cast<std::size_t>(dsu[static_cast<std::size_t>(x)])];
            x = dsu[static_cast<std::size_t>(x)];
        }
        return x;
    };

    // replay the first-child offsets, then merge from the latest birth back
    std::vector<std::int64_t> first_child(t.births.size());
    std::int64_t count = t.initial;
    double last_r = 0.0;
    for (std::size_t m = 0; m < t.births.size(); ++m) {
        const LimitTree::Birth& b = t.births[m];
        if (b.r < last_r || b.r > 1.0 - t.eta || b.parent < 0 || b.parent >= count ||
            b.count < 1)
            throw std::invalid_argument("limit_tree: inconsistent birth log");
        last_r = b.r;
        first_child[m] = count;
        count += b.count;
    }

    for (std::size_t m = t.births.size(); m-- > 0;) {
        const LimitTree::Birth& b = t.births[m];
        std::int32_t node = d.node_count();
        d.parent.push_back(-1);
        d.height.push_back(1.0 - b.r);
        std::int32_t base = find(static_cast<std::int32_t>(b.parent));
        d.parent[static_cast<std::size_t>(node_of[static_cast<std::size_t>(base)])] = node;
        for (std::int64_t c = 0; c < b.count; ++c) {
            std::int32_t member = find(static_cast<std::int32_t>(first_child[m] + c));
            d.parent[static_cast<std::size_t>(node_of[static_cast<std::size_t>(member)])] =
                node;
            dsu[static_cast<std::size_t>(member)] = base;
        }
        node_of[static_cast<std::size_t>(base)] = node;
    }

    std::vector<std::int32_t> roots;
    for (std::int32_t p = 0; p < leaves; ++p)
        if (find(p) == p)
            roots.push_back(p);
    if (roots.size() > 1) {
        // the initial blocks never meet inside the window; join them at the
        // full height
        std::int32_t node = d.node_count();
        d.parent.push_back(-1);
        d.height.push_back(1.0);
        for (std::int32_t rt : roots)
            d.parent[static_cast<std::size_t>(node_of[static_cast<std::size_t>(rt)])] = node;
    }
    d.validate();
    return d;
}

JumpPath simulate_X(double t0, double t1, RngStream& rng, std::int64_t max_jumps) {
    if (!(t0 > 0.0))
        throw std::invalid_argument("simulate_X: start time must be positive");
    if (!(t1 >= t0))
        throw std::invalid_argument("simulate_X: end time precedes start time");
    JumpPath x;
    double val = 2.0 * t0 * (rng.exponential() + rng.exponential());
    x.times.push_back(t0);
    x.values.push_back(val);
    double t = t0;
    for (std::int64_t jumps = 0;; ++jumps) {
        if (jumps >= max_jumps)
            throw resource_error("simulate_X: jump budget exhausted");
        t *= std::pow(rng.uniform(), -0.5); // survival (t/t')^2 between jumps
        if (t > t1)
            break;
        val += rng.exponential(1.0 / (2.0 * t));
        x.times.push_back(t);
        x.values.push_back(val);
    }
    x.meta["t0"] = format_double(t0);
    x.meta["t1"] = format_double(t1);
    return x;
}

double x_marginal_cdf(double t, double x) {
    if (!(t > 0.0))
        throw std::invalid_argument("x_marginal_cdf: time must be positive");
    return gamma2_cdf(x, 2.0 * t);
}

} // namespace nearzero
