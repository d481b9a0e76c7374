#include "nearzero/coalescent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <string>

#include "nearzero/errors.hpp"
#include "nearzero/numerics.hpp"

namespace nearzero {

namespace {

constexpr std::int32_t kSizeTableLimit = 1024;
constexpr int kMaxRejectionTries = 1000000;

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// P(Binomial(b, p) >= 2) = 1 - (1-p)^b - b p (1-p)^{b-1}, evaluated without
// cancellation for small b*p.
double multi_merge_prob(double b, double p) {
    if (p >= 1.0)
        return 1.0;
    double u = -b * std::log1p(-p);
    double z = b * p / (1.0 - p);
    if (b * p < 1e-3) {
        double umz = (p < 1e-4)
                         ? -b * p * p * (0.5 + 2.0 * p / 3.0 + 0.75 * p * p + 0.8 * p * p * p)
                         : u - z;
        return umz + u * (z - 0.5 * u) + u * u * (u / 6.0 - 0.5 * z);
    }
    return -std::expm1(-u) - std::exp(-u) * z;
}

// Binomial(b, p) conditioned on >= 2, by inversion outward from the mode so
// the start weight never underflows.
std::int32_t binomial_at_least_two(std::int32_t b, double p, double h, RngStream& rng) {
    double q = 1.0 - p;
    double target = rng.uniform() * h;
    std::int64_t m = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(b * p)),
                                              2, b);
    double lw = log_binomial(b, m) + static_cast<double>(m) * std::log(p) +
                static_cast<double>(b - m) * std::log1p(-p);
    double w_up = std::exp(lw);
    double w_dn = w_up;
    std::int64_t up = m, dn = m;
    double cum = w_up;
    if (cum >= target)
        return static_cast<std::int32_t>(m);
    while (up < b || dn > 2) {
        if (up < b) {
            w_up *= static_cast<double>(b - up) / static_cast<double>(up + 1) * (p / q);
            ++up;
            cum += w_up;
            if (cum >= target)
                return static_cast<std::int32_t>(up);
        }
        if (dn > 2) {
            w_dn *= static_cast<double>(dn) / static_cast<double>(b - dn + 1) * (q / p);
            --dn;
            cum += w_dn;
            if (cum >= target)
                return static_cast<std::int32_t>(dn);
        }
    }
    return static_cast<std::int32_t>(m); // rounding leftover; mode is the safe pick
}

// One envelope piece c * p^e on [lo, hi]; e != -1 throughout.
struct EnvelopePiece {
    double lo, hi, coef, expo;

    double mass() const {
        double e1 = expo + 1.0;
        double top = std::pow(hi, e1);
        double bot = (lo > 0.0) ? std::pow(lo, e1) : 0.0;
        return coef * (top - bot) / e1;
    }
    double sample(double u) const {
        double e1 = expo + 1.0;
        double top = std::pow(hi, e1);
        double bot = (lo > 0.0) ? std::pow(lo, e1) : 0.0;
        return std::pow(bot + u * (top - bot), 1.0 / e1);
    }
    double at(double p) const { return coef * std::pow(p, expo); }
};

} // namespace

StopRule StopRule::until_time(double t) {
    if (!(t >= 0.0))
        throw std::invalid_argument("stop rule: horizon must be nonnegative");
    StopRule s;
    s.horizon = t;
    return s;
}

CoalescentEngine::CoalescentEngine(LambdaModel model) : model_(std::move(model)) {}

void CoalescentEngine::warm(std::int32_t n) {
    if (n < 1)
        throw std::invalid_argument("coalescent: sample size must be at least 1");
    if (!ladder_ || ladder_->capacity() < n)
        ladder_ = std::make_unique<TotalRateLadder>(model_, std::max<std::int32_t>(n, 2));
    if (model_.kind != LambdaKind::Beta)
        return;
    std::int32_t want = std::min(n, kSizeTableLimit);
    if (want < 2 || want <= table_limit_)
        return;
    double alpha = model_.alpha;
    size_tables_.resize(static_cast<std::size_t>(want) - 1);
    std::int32_t first = std::max<std::int32_t>(table_limit_ + 1, 2);
    for (std::int32_t b = first; b <= want; ++b) {
        // relative weights gamma_{b,k}, k = 2..b, via the term ratio
        std::vector<double> w(static_cast<std::size_t>(b) - 1);
        w[0] = 1.0;
        for (std::int32_t k = 2; k < b; ++k) {
            double ratio = static_cast<double>(b - k) * (k - alpha) /
                           (static_cast<double>(k + 1) * (b - k - 1 + alpha));
            w[static_cast<std::size_t>(k) - 1] = w[static_cast<std::size_t>(k) - 2] * ratio;
        }
        size_tables_[static_cast<std::size_t>(b) - 2] = AliasTable(w);
    }
    table_limit_ = want;
}

std::int32_t CoalescentEngine::capacity() const {
    return ladder_ ? static_cast<std::int32_t>(ladder_->capacity()) : 0;
}

double CoalescentEngine::total_merge_rate(std::int32_t b) const {
    if (!ladder_ || ladder_->capacity() < b)
        throw std::logic_error("coalescent: warm the engine up to this size first");
    return ladder_->total(b);
}

std::int32_t CoalescentEngine::merger_size(std::int32_t b, RngStream& rng) const {
    if (b < 2)
        throw std::invalid_argument("merger_size: needs at least two blocks");
    if (model_.kind == LambdaKind::KingmanAtom)
        return 2;
    if (model_.kind == LambdaKind::Beta && b <= table_limit_)
        return 2 + static_cast<std::int32_t>(
                       size_tables_[static_cast<std::size_t>(b) - 2].sample(rng));
    return merger_size_mixture(b, rng);
}

std::int32_t CoalescentEngine::merger_size_mixture(std::int32_t b, RngStream& rng) const {
    if (b < 2)
        throw std::invalid_argument("merger_size: needs at least two blocks");
    if (model_.kind == LambdaKind::KingmanAtom)
        return 2;

    double bd = static_cast<double>(b);
    double pairs = 0.5 * bd * (bd - 1.0);
    double p_star = 1.0 / std::sqrt(pairs);
    double alpha = model_.alpha;
    double a = model_.a_lambda;

    // Envelope for the merger-probability density h_b(p) p^{-2} Lambda(dp):
    // replace h_b by min(1, pairs * p^2) and the density by its head form or
    // tabulated supremum. Each piece is a power law, sampled by inversion.
    std::vector<EnvelopePiece> pieces;
    if (model_.kind == LambdaKind::Beta) {
        pieces.push_back({0.0, p_star, pairs * a, 1.0 - alpha});
        if (p_star < 1.0)
            pieces.push_back({p_star, 1.0, a, -1.0 - alpha});
    } else {
        double h0 = 1.0 / static_cast<double>(model_.density.size());
        double fs = model_.density_sup();
        pieces.push_back({0.0, std::min(h0, p_star), pairs * a, 1.0 - alpha});
        if (p_star < h0) {
            pieces.push_back({p_star, h0, a, -1.0 - alpha});
            pieces.push_back({h0, 1.0, fs, -2.0});
        } else {
            if (h0 < p_star)
                pieces.push_back({h0, p_star, pairs * fs, 0.0});
            if (p_star < 1.0)
                pieces.push_back({p_star, 1.0, fs, -2.0});
        }
    }
    double total = 0.0;
    for (const auto& piece : pieces)
        total += piece.mass();
    if (!(total > 0.0))
        throw std::logic_error("merger_size: empty rate envelope");

    for (int tries = 0; tries < kMaxRejectionTries; ++tries) {
        double pick = rng.uniform() * total;
        const EnvelopePiece* piece = &pieces.back();
        for (const auto& cand : pieces) {
            if (pick < cand.mass()) {
                piece = &cand;
                break;
            }
            pick -= cand.mass();
        }
        double p = piece->sample(rng.uniform());
        p = std::clamp(p, std::numeric_limits<double>::min(), 1.0);
        double h = multi_merge_prob(bd, p);
        double density = (model_.kind == LambdaKind::Beta)
                             ? a * std::pow(p, 1.0 - alpha) * std::pow(1.0 - p, alpha - 1.0)
                             : model_.density_at(p);
        double ratio = h * density / (p * p * piece->at(p));
        if (rng.uniform() < ratio)
            return binomial_at_least_two(b, p, h, rng);
    }
    throw resource_error("merger_size: rejection sampler made no progress");
}

CoalescentHistory CoalescentEngine::simulate(std::int32_t n, const StopRule& stop,
                                             RngStream& rng) const {
    if (n < 1)
        throw std::invalid_argument("coalescent: sample size must be at least 1");
    if (!ladder_ || ladder_->capacity() < n)
        throw std::logic_error("coalescent: warm the engine up to this size first");

    CoalescentHistory h;
    h.n = n;
    h.parent.assign(static_cast<std::size_t>(n), -1);
    h.node_time.assign(static_cast<std::size_t>(n), 0.0);
    h.subtree_leaves.assign(static_cast<std::size_t>(n), 1);

    std::vector<std::int32_t> active(static_cast<std::size_t>(n));
    std::iota(active.begin(), active.end(), 0);

    double t = 0.0;
    std::int32_t b = n;
    while (b >= 2) {
        double rate = ladder_->total(b);
        if (!(rate > 0.0)) {
            if (std::isinf(stop.horizon))
                throw std::logic_error("coalescent: zero merge rate, run cannot absorb");
            h.final_time = stop.horizon;
            h.absorbed = false;
            return h;
        }
        double tn = t + rng.exponential(rate);
        if (!(tn > t))
            tn = std::nextafter(t, std::numeric_limits<double>::infinity());
        if (tn > stop.horizon) {
            h.final_time = stop.horizon;
            h.absorbed = false;
            return h;
        }

        std::int32_t k = merger_size(b, rng);
        for (std::int32_t i = 0; i < k; ++i) {
            auto j = rng.uniform_below(static_cast<std::uint64_t>(b - i));
            std::swap(active[j], active[static_cast<std::size_t>(b) - 1 - i]);
        }

        MergerEvent ev;
        ev.time = tn;
        ev.new_block = static_cast<std::int32_t>(h.parent.size());
        ev.blocks_after = b - k + 1;
        ev.merged.assign(active.begin() + (b - k), active.begin() + b);
        std::sort(ev.merged.begin(), ev.merged.end());

        std::int32_t leaves = 0;
        for (std::int32_t id : ev.merged) {
            h.parent[static_cast<std::size_t>(id)] = ev.new_block;
            leaves += h.subtree_leaves[static_cast<std::size_t>(id)];
        }
        h.parent.push_back(-1);
        h.node_time.push_back(tn);
        h.subtree_leaves.push_back(leaves);

        active.resize(static_cast<std::size_t>(b) - k);
        active.push_back(ev.new_block);
        b = ev.blocks_after;
        t = tn;
        h.events.push_back(std::move(ev));
    }
    h.final_time = t;
    h.absorbed = true;
    return h;
}

CoalescentHistory simulate_coalescent(const LambdaModel& model, std::int32_t n,
                                      const StopRule& stop, std::uint64_t seed,
                                      std::uint64_t replica) {
    CoalescentEngine engine(model);
    engine.warm(n);
    RngStream rng(seed, "coalescent", replica);
    return engine.simulate(n, stop, rng);
}

std::int32_t block_count(const CoalescentHistory& h, double t) {
    if (t < 0.0)
        throw std::invalid_argument("block_count: time must be nonnegative");
    if (t > h.final_time && !h.absorbed)
        throw std::invalid_argument("block_count: time beyond the simulated horizon");
    auto it = std::upper_bound(h.events.begin(), h.events.end(), t,
                               [](double v, const MergerEvent& e) { return v < e.time; });
    if (it == h.events.begin())
        return h.n;
    return (it - 1)->blocks_after;
}

double frequency_of(const CoalescentHistory& h, std::int32_t label, double t) {
    if (label < 0 || label >= h.n)
        throw std::invalid_argument("frequency_of: label out of range");
    if (!(t > 0.0))
        throw std::invalid_argument("frequency_of: time must be positive");
    if (t > h.final_time && !h.absorbed)
        throw std::invalid_argument("frequency_of: time beyond the simulated horizon");
    std::int32_t v = label;
    while (h.parent[static_cast<std::size_t>(v)] >= 0 &&
           h.node_time[static_cast<std::size_t>(h.parent[static_cast<std::size_t>(v)])] <= t)
        v = h.parent[static_cast<std::size_t>(v)];
    return static_cast<double>(h.subtree_leaves[static_cast<std::size_t>(v)]) /
           static_cast<double>(h.n);
}

JumpPath extract_Z(const CoalescentHistory& h, double epsilon, std::int32_t label) {
    if (label < 0 || label >= h.n)
        throw std::invalid_argument("extract_Z: label out of range");
    if (!(epsilon > 0.0))
        throw std::invalid_argument("extract_Z: epsilon must be positive");
    if (epsilon > h.final_time && !h.absorbed)
        throw std::invalid_argument("extract_Z: run does not cover epsilon");

    // B = block holding the label at time epsilon
    std::int32_t top = label;
    while (h.parent[static_cast<std::size_t>(top)] >= 0 &&
           h.node_time[static_cast<std::size_t>(h.parent[static_cast<std::size_t>(top)])] <=
               epsilon)
        top = h.parent[static_cast<std::size_t>(top)];

    // Z(r) counts the blocks at time (1-r)*epsilon that make up B.  Each merger
    // inside B's subtree raises the count by k-1 once (1-r)*epsilon drops below
    // its time, so the jumps are the subtree's events taken in reverse time
    // order.  Internal ids increase with event time, which makes one reverse
    // sweep enough to settle membership.
    std::vector<char> inside(h.parent.size(), 0);
    inside[static_cast<std::size_t>(top)] = 1;
    JumpPath z;
    z.times.push_back(0.0);
    z.values.push_back(1.0);
    if (top >= h.n) {
        for (std::size_t e = static_cast<std::size_t>(top - h.n) + 1; e-- > 0;) {
            const MergerEvent& ev = h.events[e];
            if (!inside[static_cast<std::size_t>(ev.new_block)])
                continue;
            for (std::int32_t m : ev.merged)
                inside[static_cast<std::size_t>(m)] = 1;
            if (ev.time < epsilon) {
                z.times.push_back(1.0 - ev.time / epsilon);
                z.values.push_back(z.values.back() +
                                   static_cast<double>(ev.merged.size()) - 1.0);
            }
        }
    }
    z.meta["epsilon"] = format_double(epsilon);
    z.meta["n"] = std::to_string(h.n);
    z.meta["label"] = std::to_string(label);
    if (h.subtree_leaves[static_cast<std::size_t>(top)] == h.n)
        z.meta["whole_block"] = "1";
    return z;
}

Dendrogram evans_space(const CoalescentHistory& h, std::int32_t center, double radius,
                       double resolution, std::int32_t max_leaves) {
    if (center < 0 || center >= h.n)
        throw std::invalid_argument("evans_space: center out of range");
    if (radius < 0.0)
        throw std::invalid_argument("evans_space: radius must be nonnegative");
    if (radius > h.final_time && !h.absorbed)
        throw std::invalid_argument("evans_space: radius beyond the simulated horizon");

    std::int32_t top = center;
    while (h.parent[static_cast<std::size_t>(top)] >= 0 &&
           h.node_time[static_cast<std::size_t>(h.parent[static_cast<std::size_t>(top)])] <=
               radius)
        top = h.parent[static_cast<std::size_t>(top)];

    Dendrogram d;
    if (top < h.n) {
        d = Dendrogram::single_leaf(1.0 / static_cast<double>(h.n), center);
    } else {
        // children lists for the stored forest, in compressed form
        std::size_t total = h.parent.size();
        std::vector<std::int32_t> head(total + 1, 0);
        for (std::int32_t p : h.parent)
            if (p >= 0)
                ++head[static_cast<std::size_t>(p) + 1];
        for (std::size_t i = 1; i <= total; ++i)
            head[i] += head[i - 1];
        std::vector<std::int32_t> kids(static_cast<std::size_t>(head[total]));
        std::vector<std::int32_t> fill(head.begin(), head.end() - 1);
        for (std::size_t v = 0; v < total; ++v) {
            std::int32_t p = h.parent[v];
            if (p >= 0)
                kids[static_cast<std::size_t>(fill[static_cast<std::size_t>(p)]++)] =
                    static_cast<std::int32_t>(v);
        }

        std::vector<std::int32_t> leaves, internals, stack{top};
        while (!stack.empty()) {
            std::int32_t v = stack.back();
            stack.pop_back();
            if (v < h.n) {
                leaves.push_back(v);
                continue;
            }
            internals.push_back(v);
            for (std::int32_t c = head[static_cast<std::size_t>(v)];
                 c < head[static_cast<std::size_t>(v) + 1]; ++c)
                stack.push_back(kids[static_cast<std::size_t>(c)]);
        }
        std::sort(leaves.begin(), leaves.end());
        std::sort(internals.begin(), internals.end());

        std::int32_t nl = static_cast<std::int32_t>(leaves.size());
        std::vector<std::int32_t> new_id(total, -1);
        for (std::int32_t i = 0; i < nl; ++i)
            new_id[static_cast<std::size_t>(leaves[static_cast<std::size_t>(i)])] = i;
        for (std::size_t i = 0; i < internals.size(); ++i)
            new_id[static_cast<std::size_t>(internals[i])] =
                nl + static_cast<std::int32_t>(i);

        d.leaf_count = nl;
        d.parent.assign(leaves.size() + internals.size(), -1);
        d.height.reserve(internals.size());
        d.mass.assign(leaves.size(), 1.0 / static_cast<double>(h.n));
        d.leaf_label.reserve(leaves.size());
        for (std::int32_t v : leaves) {
            d.leaf_label.push_back(v);
            d.parent[static_cast<std::size_t>(new_id[static_cast<std::size_t>(v)])] =
                new_id[static_cast<std::size_t>(h.parent[static_cast<std::size_t>(v)])];
        }
        for (std::int32_t v : internals) {
            d.height.push_back(h.node_time[static_cast<std::size_t>(v)]);
            if (v != top)
                d.parent[static_cast<std::size_t>(new_id[static_cast<std::size_t>(v)])] =
                    new_id[static_cast<std::size_t>(h.parent[static_cast<std::size_t>(v)])];
        }
        d.point = new_id[static_cast<std::size_t>(center)];
    }

    if (resolution > 0.0)
        d = space_from_balls(d, resolution);
    if (max_leaves > 0 && d.leaf_count > max_leaves)
        d = truncate_by_mass(d, max_leaves);
    d.validate();
    return d;
}

} // namespace nearzero
