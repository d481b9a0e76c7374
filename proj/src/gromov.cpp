#include "nearzero/gromov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace nearzero {

namespace {

struct Metric {
    int n = 0;
    std::vector<double> d; // row-major n*n

    double at(int i, int j) const { return d[static_cast<std::size_t>(i) * n + j]; }
};

Metric leaf_metric(const Dendrogram& t) {
    Metric m;
    m.n = t.leaf_count;
    m.d.assign(static_cast<std::size_t>(m.n) * m.n, 0.0);
    for (std::int32_t i = 0; i < t.leaf_count; ++i)
        for (std::int32_t j = i + 1; j < t.leaf_count; ++j) {
            double v = t.distance(i, j);
            m.d[static_cast<std::size_t>(i) * m.n + j] = v;
            m.d[static_cast<std::size_t>(j) * m.n + i] = v;
        }
    return m;
}

using PairList = std::vector<std::pair<int, int>>;

double added_distortion(const Metric& a, const Metric& b, const PairList& pairs,
                        int x, int y) {
    double worst = 0.0;
    for (const auto& [px, py] : pairs)
        worst = std::max(worst, std::abs(a.at(x, px) - b.at(y, py)));
    return worst;
}

// Deterministic greedy correspondence; returns its distortion and the pairs.
double greedy_correspondence(const Metric& a, const Metric& b, PairList& pairs) {
    pairs.clear();
    double dis = 0.0;
    std::vector<char> covered_b(static_cast<std::size_t>(b.n), 0);
    for (int x = 0; x < a.n; ++x) {
        int best_y = 0;
        double best_inc = std::numeric_limits<double>::infinity();
        for (int y = 0; y < b.n; ++y) {
            double inc = added_distortion(a, b, pairs, x, y);
            if (inc < best_inc) {
                best_inc = inc;
                best_y = y;
            }
        }
        pairs.emplace_back(x, best_y);
        covered_b[static_cast<std::size_t>(best_y)] = 1;
        dis = std::max(dis, best_inc);
    }
    for (int y = 0; y < b.n; ++y) {
        if (covered_b[static_cast<std::size_t>(y)])
            continue;
        int best_x = 0;
        double best_inc = std::numeric_limits<double>::infinity();
        for (int x = 0; x < a.n; ++x) {
            double inc = 0.0;
            for (const auto& [px, py] : pairs)
                inc = std::max(inc, std::abs(a.at(x, px) - b.at(y, py)));
            if (inc < best_inc) {
                best_inc = inc;
                best_x = x;
            }
        }
        pairs.emplace_back(best_x, y);
        dis = std::max(dis, best_inc);
    }
    return dis;
}

struct ExactSearch {
    const Metric* a;
    const Metric* b;
    double best;
    PairList best_pairs;
    PairList current;

    // Phase 2: cover the B side elements missed by the map A -> B.
    void cover_b(const std::vector<int>& uncovered, std::size_t idx, double dis) {
        if (dis >= best)
            return;
        if (idx == uncovered.size()) {
            best = dis;
            best_pairs = current;
            return;
        }
        int y = uncovered[idx];
        std::vector<std::pair<double, int>> cands;
        cands.reserve(static_cast<std::size_t>(a->n));
        for (int x = 0; x < a->n; ++x) {
            double inc = 0.0;
            for (const auto& [px, py] : current)
                inc = std::max(inc, std::abs(a->at(x, px) - b->at(y, py)));
            if (inc < best)
                cands.emplace_back(inc, x);
        }
        std::sort(cands.begin(), cands.end());
        for (const auto& [inc, x] : cands) {
            if (std::max(dis, inc) >= best)
                break;
            current.emplace_back(x, y);
            cover_b(uncovered, idx + 1, std::max(dis, inc));
            current.pop_back();
        }
    }

    // Phase 1: choose the image of each A element.
    void assign_a(int x, double dis) {
        if (dis >= best)
            return;
        if (x == a->n) {
            std::vector<char> covered(static_cast<std::size_t>(b->n), 0);
            for (const auto& [px, py] : current) {
                (void)px;
                covered[static_cast<std::size_t>(py)] = 1;
            }
            std::vector<int> uncovered;
            for (int y = 0; y < b->n; ++y)
                if (!covered[static_cast<std::size_t>(y)])
                    uncovered.push_back(y);
            cover_b(uncovered, 0, dis);
            return;
        }
        std::vector<std::pair<double, int>> cands;
        cands.reserve(static_cast<std::size_t>(b->n));
        for (int y = 0; y < b->n; ++y) {
            double inc = added_distortion(*a, *b, current, x, y);
            if (inc < best)
                cands.emplace_back(inc, y);
        }
        std::sort(cands.begin(), cands.end());
        for (const auto& [inc, y] : cands) {
            if (std::max(dis, inc) >= best)
                break;
            current.emplace_back(x, y);
            assign_a(x + 1, std::max(dis, inc));
            current.pop_back();
        }
    }
};

// Minimal correspondence distortion between two finite metrics; fills pairs
// with an optimal correspondence.
double min_distortion(const Metric& a, const Metric& b, PairList& pairs) {
    // Any correspondence contains a sub-correspondence of the searched shape
    // (a map each way), and passing to it cannot increase distortion.
    const Metric* pa = &a;
    const Metric* pb = &b;
    bool swapped = false;
    if (a.n > b.n) {
        std::swap(pa, pb);
        swapped = true;
    }
    PairList greedy_pairs;
    double upper = greedy_correspondence(*pa, *pb, greedy_pairs);

    ExactSearch search{pa, pb, upper + 1e-15, greedy_pairs, {}};
    search.best_pairs = greedy_pairs;
    search.best = upper + 1e-15;
    search.assign_a(0, 0.0);

    double dis = std::min(upper, search.best);
    pairs.clear();
    for (const auto& [x, y] : search.best_pairs)
        pairs.emplace_back(swapped ? y : x, swapped ? x : y);
    return dis;
}

// Ball-count step function: N(r) = counts[i] for r in [thresholds[i],
// thresholds[i+1]), with thresholds[0] = 0.
void count_steps(const Dendrogram& t, std::vector<double>& thresholds,
                 std::vector<std::int64_t>& counts) {
    std::vector<std::int32_t> arity(t.parent.size(), 0);
    for (std::int32_t v = 0; v < t.node_count(); ++v)
        if (t.parent[static_cast<std::size_t>(v)] >= 0)
            ++arity[static_cast<std::size_t>(t.parent[static_cast<std::size_t>(v)])];

    thresholds.assign(1, 0.0);
    counts.assign(1, t.leaf_count);
    for (std::int32_t v = t.leaf_count; v < t.node_count(); ++v) {
        double h = t.node_height(v);
        std::int64_t next = counts.back() - (arity[static_cast<std::size_t>(v)] - 1);
        if (h == thresholds.back()) {
            counts.back() = next;
        } else {
            thresholds.push_back(h);
            counts.push_back(next);
        }
    }
}

// Largest lower bound available from covering counts: if Y needs more balls
// at radius h than X does at radius r with h > r, then gh >= (h - r) / 2.
double covering_lower(const Dendrogram& x, const Dendrogram& y) {
    std::vector<double> tx, ty;
    std::vector<std::int64_t> cx, cy;
    count_steps(x, tx, cx);
    count_steps(y, ty, cy);

    auto one_side = [](const std::vector<double>& tr, const std::vector<std::int64_t>& cr,
                       const std::vector<double>& th, const std::vector<std::int64_t>& ch) {
        // for each step (r, c) of the first space, find where the second
        // space's count first drops to c or below
        double bound = 0.0;
        for (std::size_t i = 0; i < tr.size(); ++i) {
            std::int64_t c = cr[i];
            double t_drop = 0.0;
            bool found = false;
            for (std::size_t j = 0; j < th.size(); ++j) {
                if (ch[j] <= c) {
                    t_drop = th[j];
                    found = true;
                    break;
                }
            }
            if (found && t_drop > tr[i])
                bound = std::max(bound, 0.5 * (t_drop - tr[i]));
        }
        return bound;
    };
    return std::max(one_side(tx, cx, ty, cy), one_side(ty, cy, tx, cx));
}

// Coarsen to at most max_leaves by cutting at the smallest sufficient height;
// returns the cut height used (0 when no coarsening was needed).
double coarsen_to(const Dendrogram& t, std::int32_t max_leaves, Dendrogram& out) {
    if (t.leaf_count <= max_leaves) {
        out = t;
        return 0.0;
    }
    std::vector<double> th;
    std::vector<std::int64_t> cn;
    count_steps(t, th, cn);
    double eta = th.back();
    for (std::size_t i = 0; i < th.size(); ++i) {
        if (cn[i] <= max_leaves) {
            eta = th[i];
            break;
        }
    }
    out = space_from_balls(t, eta);
    return eta;
}

// Subtree mass sums in node order.
std::vector<double> subtree_mass(const Dendrogram& t) {
    std::vector<double> s(t.parent.size(), 0.0);
    for (std::int32_t i = 0; i < t.leaf_count; ++i)
        s[static_cast<std::size_t>(i)] = t.mass[static_cast<std::size_t>(i)];
    for (std::int32_t v = 0; v < t.node_count(); ++v) {
        std::int32_t p = t.parent[static_cast<std::size_t>(v)];
        if (p >= 0)
            s[static_cast<std::size_t>(p)] += s[static_cast<std::size_t>(v)];
    }
    return s;
}

Dendrogram center_ball(const Dendrogram& t, double radius) {
    return ball_decomposition(t, t.point, radius).front();
}

// Exact Prokhorov distance inside a glued space: mu lives on side A, nu on
// side B, cross distances given by dglue (a x b). Feasibility of eps is
// monotone, so bisection converges to the infimum.
double glue_prokhorov(const std::vector<double>& mu, const std::vector<double>& nu,
                      const Metric& a, const Metric& b,
                      const std::vector<double>& dglue) {
    int na = a.n, nb = b.n;
    if (na > 20 || nb > 20)
        throw std::logic_error("glue_prokhorov: side too large");

    // min glue distance from subset S of A to each B element, via subset DP
    std::size_t n_subsets = static_cast<std::size_t>(1) << na;
    std::vector<double> min_to_b(n_subsets * static_cast<std::size_t>(nb),
                                 std::numeric_limits<double>::infinity());
    std::vector<double> mu_of(n_subsets, 0.0);
    for (std::size_t s = 1; s < n_subsets; ++s) {
        std::size_t low = s & (~s + 1);
        int i = std::countr_zero(static_cast<unsigned long long>(low));
        std::size_t rest = s ^ low;
        mu_of[s] = mu_of[rest] + mu[static_cast<std::size_t>(i)];
        for (int j = 0; j < nb; ++j) {
            double v = dglue[static_cast<std::size_t>(i) * nb + j];
            double prev = rest ? min_to_b[rest * nb + j]
                               : std::numeric_limits<double>::infinity();
            min_to_b[s * nb + j] = std::min(prev, v);
        }
    }
    // symmetric tables for subsets of B
    std::size_t n_subsets_b = static_cast<std::size_t>(1) << nb;
    std::vector<double> min_to_a(n_subsets_b * static_cast<std::size_t>(na),
                                 std::numeric_limits<double>::infinity());
    std::vector<double> nu_of(n_subsets_b, 0.0);
    for (std::size_t s = 1; s < n_subsets_b; ++s) {
        std::size_t low = s & (~s + 1);
        int j = std::countr_zero(static_cast<unsigned long long>(low));
        std::size_t rest = s ^ low;
        nu_of[s] = nu_of[rest] + nu[static_cast<std::size_t>(j)];
        for (int i = 0; i < na; ++i) {
            double v = dglue[static_cast<std::size_t>(i) * nb + j];
            double prev = rest ? min_to_a[rest * na + i]
                               : std::numeric_limits<double>::infinity();
            min_to_a[s * na + i] = std::min(prev, v);
        }
    }

    double mu_total = mu_of[n_subsets - 1];
    double nu_total = nu_of[n_subsets_b - 1];

    auto feasible = [&](double eps) {
        for (std::size_t s = 1; s < n_subsets; ++s) {
            double reach = 0.0;
            for (int j = 0; j < nb; ++j)
                if (min_to_b[s * nb + j] <= eps)
                    reach += nu[static_cast<std::size_t>(j)];
            if (mu_of[s] > reach + eps)
                return false;
        }
        for (std::size_t s = 1; s < n_subsets_b; ++s) {
            double reach = 0.0;
            for (int i = 0; i < na; ++i)
                if (min_to_a[s * na + i] <= eps)
                    reach += mu[static_cast<std::size_t>(i)];
            if (nu_of[s] > reach + eps)
                return false;
        }
        return true;
    };

    double hi = std::abs(mu_total - nu_total);
    for (double v : dglue)
        hi = std::max(hi, v);
    if (!feasible(hi))
        throw std::logic_error("glue_prokhorov: upper bracket infeasible");
    double lo = 0.0;
    for (int it = 0; it < 60 && hi - lo > 1e-13; ++it) {
        double mid = 0.5 * (lo + hi);
        (feasible(mid) ? hi : lo) = mid;
    }
    return hi;
}

// Upper bound on the measured ball distance via one correspondence.
double ghp_upper_via(const PairList& pairs, const Metric& a, const Metric& b,
                     const std::vector<double>& mu, const std::vector<double>& nu) {
    double dis = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i)
        for (std::size_t j = i + 1; j < pairs.size(); ++j)
            dis = std::max(dis, std::abs(a.at(pairs[i].first, pairs[j].first) -
                                         b.at(pairs[i].second, pairs[j].second)));
    double half = 0.5 * dis;
    std::vector<double> dglue(static_cast<std::size_t>(a.n) * b.n,
                              std::numeric_limits<double>::infinity());
    for (int i = 0; i < a.n; ++i)
        for (int j = 0; j < b.n; ++j) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& [px, py] : pairs)
                best = std::min(best, a.at(i, px) + half + b.at(py, j));
            dglue[static_cast<std::size_t>(i) * b.n + j] = best;
        }
    double pr = glue_prokhorov(mu, nu, a, b, dglue);
    return std::max(half, pr);
}

} // namespace

double gh_exact(const Dendrogram& x, const Dendrogram& y, int size_cap) {
    if (x.leaf_count + y.leaf_count > size_cap)
        throw std::invalid_argument(
            "gh_exact: combined leaf count exceeds the size cap; use gh_bounds");
    Metric a = leaf_metric(x);
    Metric b = leaf_metric(y);
    PairList pairs;
    return 0.5 * min_distortion(a, b, pairs);
}

GhBounds gh_bounds(const Dendrogram& x, const Dendrogram& y) {
    double lower = 0.5 * std::abs(x.diameter() - y.diameter());
    lower = std::max(lower, covering_lower(x, y));

    Dendrogram cx, cy;
    double eta_x = coarsen_to(x, 64, cx);
    double eta_y = coarsen_to(y, 64, cy);
    Metric a = leaf_metric(cx);
    Metric b = leaf_metric(cy);
    PairList pairs;
    double dis = greedy_correspondence(a, b, pairs);
    double upper = 0.5 * dis + 0.5 * (eta_x + eta_y);
    upper = std::max(upper, lower);
    return {lower, upper};
}

double prokhorov(const Dendrogram& x, const Dendrogram& y) {
    if (x.leaf_count != y.leaf_count || x.parent != y.parent || x.height != y.height)
        throw std::invalid_argument("prokhorov: measures must share one support tree");
    if (x.mass.empty() || y.mass.empty())
        throw std::invalid_argument("prokhorov: both sides need leaf masses");

    std::vector<double> mu_sub = subtree_mass(x);
    std::vector<double> nu_sub = subtree_mass(y);

    std::vector<double> thresholds{0.0};
    for (double h : x.height)
        if (h != thresholds.back())
            thresholds.push_back(h);

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < thresholds.size(); ++m) {
        double t = thresholds[m];
        double over = 0.0, under = 0.0;
        for (std::int32_t v = 0; v < x.node_count(); ++v) {
            if (x.node_height(v) > t)
                continue;
            std::int32_t p = x.parent[static_cast<std::size_t>(v)];
            if (p >= 0 && x.node_height(p) <= t)
                continue; // not a ball root at this radius
            double diff = mu_sub[static_cast<std::size_t>(v)] - nu_sub[static_cast<std::size_t>(v)];
            if (diff > 0)
                over += diff;
            else
                under -= diff;
        }
        double phi = std::max(over, under);
        double eps = std::max(t, phi);
        double next = (m + 1 < thresholds.size()) ? thresholds[m + 1]
                                                  : std::numeric_limits<double>::infinity();
        if (eps < next)
            best = std::min(best, eps);
    }
    return best;
}

double pointed_gh(const Dendrogram& x, const Dendrogram& y, int size_cap) {
    double rx = x.radius_about_point();
    double ry = y.radius_about_point();
    int saturate = std::max(1, static_cast<int>(std::ceil(std::max(rx, ry))));

    double total = 0.0;
    for (int n = 1; n < saturate; ++n) {
        Dendrogram bx = center_ball(x, n);
        Dendrogram by = center_ball(y, n);
        double d = (bx.leaf_count + by.leaf_count <= size_cap)
                       ? gh_exact(bx, by, size_cap)
                       : gh_bounds(bx, by).upper;
        total += std::ldexp(std::min(1.0, d), -n);
    }
    double d_full = (x.leaf_count + y.leaf_count <= size_cap)
                        ? gh_exact(x, y, size_cap)
                        : gh_bounds(x, y).upper;
    total += std::ldexp(std::min(1.0, d_full), 1 - saturate);
    return total;
}

double pointed_ghp(const Dendrogram& x, const Dendrogram& y, int size_cap) {
    if (x.mass.empty() || y.mass.empty())
        throw std::invalid_argument("pointed_ghp: both sides need leaf masses");

    auto ball_term = [&](const Dendrogram& bx, const Dendrogram& by) {
        if (bx.leaf_count + by.leaf_count > size_cap)
            throw std::invalid_argument(
                "pointed_ghp: ball exceeds the size cap; coarsen or truncate first");
        Metric a = leaf_metric(bx);
        Metric b = leaf_metric(by);
        PairList exact_pairs, greedy_pairs;
        min_distortion(a, b, exact_pairs);
        greedy_correspondence(a, b, greedy_pairs);
        double best = ghp_upper_via(exact_pairs, a, b, bx.mass, by.mass);
        best = std::min(best, ghp_upper_via(greedy_pairs, a, b, bx.mass, by.mass));
        return best;
    };

    double rx = x.radius_about_point();
    double ry = y.radius_about_point();
    int saturate = std::max(1, static_cast<int>(std::ceil(std::max(rx, ry))));

    double total = 0.0;
    for (int n = 1; n < saturate; ++n)
        total += std::ldexp(std::min(1.0, ball_term(center_ball(x, n), center_ball(y, n))), -n);
    total += std::ldexp(std::min(1.0, ball_term(x, y)), 1 - saturate);
    return total;
}

} // namespace nearzero
