#include "nearzero/excursion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "nearzero/errors.hpp"

namespace nearzero {

namespace {

constexpr std::size_t kNoCenter = static_cast<std::size_t>(-1);

// One capped attempt at the conditioned excursion: radial 3d Brownian motion
// from 0 until it first reaches 1, then an independent Brownian descent killed
// at 0. Returns false when the sample budget runs out mid-path.
template <class Emit>
bool conditioned_attempt(double dt, RngStream& rng, std::int64_t budget, Emit&& emit) {
    const double sigma = std::sqrt(dt);
    std::int64_t used = 1;
    emit(0.0);
    double r = 0.0;
    while (r < 1.0) {
        if (++used > budget)
            return false;
        const double dx = r + sigma * rng.normal();
        const double dy = sigma * rng.normal();
        const double dz = sigma * rng.normal();
        r = std::sqrt(dx * dx + dy * dy + dz * dz);
        emit(r);
    }
    double w = r;
    while (w > 0.0) {
        if (++used > budget)
            return false;
        w += sigma * rng.normal();
        emit(w);
    }
    return true;
}

void check_excursion_args(double dt, double t_cap) {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("conditioned excursion: dt must be positive");
    if (!(t_cap > 0.0) || t_cap < dt)
        throw std::invalid_argument("conditioned excursion: t_cap must exceed dt");
}

// Step size at distance d from the nearest level that carries statistics:
// the plain grid dt inside a 6*sqrt(dt) buffer, (d/6)^2 beyond it so that
// clearing the gap in one step is a six sigma event. Capped at the remaining
// time budget (floored at dt) so budget checks stay grid comparisons.
double banded_step(double dt, double d, double remaining) {
    const double h = std::max(dt, d * d / 36.0);
    return std::min(h, std::max(remaining, dt));
}

} // namespace

double LocalTimeProfile::at(double level) const {
    if (levels.empty())
        throw std::logic_error("local time profile: empty");
    if (level < levels.front() || level > levels.back())
        throw std::invalid_argument("local time profile: level outside the tabulated range");
    auto it = std::lower_bound(levels.begin(), levels.end(), level);
    std::size_t hi = static_cast<std::size_t>(it - levels.begin());
    if (hi < levels.size() && levels[hi] == level)
        return values[hi];
    const double x0 = levels[hi - 1];
    const double x1 = levels[hi];
    const double w = (level - x0) / (x1 - x0);
    return values[hi - 1] * (1.0 - w) + values[hi] * w;
}

LocalTimeProfile local_time_profile(const PathGrid& path, std::vector<double> levels,
                                    double window_scale) {
    if (path.values.empty())
        throw std::invalid_argument("local time: empty path");
    if (levels.empty())
        throw std::invalid_argument("local time: no levels");
    if (!(window_scale > 0.0))
        throw std::invalid_argument("local time: window scale must be positive");
    std::sort(levels.begin(), levels.end());
    std::vector<double> sorted = path.values;
    std::sort(sorted.begin(), sorted.end());
    const double eps = window_scale * std::sqrt(path.dt);
    LocalTimeProfile out;
    out.values.reserve(levels.size());
    for (double x : levels) {
        auto lo = std::upper_bound(sorted.begin(), sorted.end(), x - eps);
        auto hi = std::lower_bound(sorted.begin(), sorted.end(), x + eps);
        out.values.push_back(path.dt * static_cast<double>(hi - lo) / (2.0 * eps));
    }
    out.levels = std::move(levels);
    return out;
}

double local_time_at(const PathGrid& path, double level, double window_scale) {
    if (path.values.empty())
        throw std::invalid_argument("local time: empty path");
    if (!(window_scale > 0.0))
        throw std::invalid_argument("local time: window scale must be positive");
    const double eps = window_scale * std::sqrt(path.dt);
    std::int64_t hits = 0;
    for (double v : path.values)
        if (std::abs(v - level) < eps)
            ++hits;
    return path.dt * static_cast<double>(hits) / (2.0 * eps);
}

PathGrid conditioned_excursion(double dt, RngStream& rng, double t_cap) {
    check_excursion_args(dt, t_cap);
    const std::int64_t budget = static_cast<std::int64_t>(t_cap / dt);
    PathGrid p;
    p.dt = dt;
    p.origin_index = 0;
    for (;;) {
        p.values.clear();
        // resampling on budget exhaustion conditions the lifetime on <= t_cap
        if (conditioned_attempt(dt, rng, budget, [&](double v) { p.values.push_back(v); }))
            return p;
    }
}

ExcursionStats conditioned_excursion_stats(double dt, RngStream& rng, double t_cap) {
    check_excursion_args(dt, t_cap);
    const std::int64_t budget = static_cast<std::int64_t>(t_cap / dt);
    const double eps = 2.0 * std::sqrt(dt);
    for (;;) {
        double occ = 0.0;
        std::int64_t count = 0;
        std::int64_t first_high = -1;
        bool done = conditioned_attempt(dt, rng, budget, [&](double v) {
            if (std::abs(v - 1.0) < eps)
                occ += dt;
            if (first_high < 0 && v >= 1.0)
                first_high = count;
            ++count;
        });
        if (!done)
            continue;
        ExcursionStats s;
        s.ell1 = occ / (2.0 * eps);
        s.tau1 = static_cast<double>(first_high) * dt;
        s.length = static_cast<double>(count - 1) * dt;
        return s;
    }
}

ExcursionStats conditioned_excursion_stats_banded(double dt, RngStream& rng, double t_cap) {
    check_excursion_args(dt, t_cap);
    const double eps = 2.0 * std::sqrt(dt);
    for (;;) {
        double occ = 0.0;
        double elapsed = 0.0;
        bool out_of_time = false;
        // ascent reads level 1 only, so the step tracks the gap below its
        // occupation window
        double r = 0.0;
        while (r < 1.0) {
            if (elapsed >= t_cap) {
                out_of_time = true;
                break;
            }
            const double h = banded_step(dt, 1.0 - eps - r, t_cap - elapsed);
            const double sigma = std::sqrt(h);
            const double dx = r + sigma * rng.normal();
            const double dy = sigma * rng.normal();
            const double dz = sigma * rng.normal();
            r = std::sqrt(dx * dx + dy * dy + dz * dz);
            elapsed += h;
            if (std::abs(r - 1.0) < eps)
                occ += h;
        }
        if (out_of_time)
            continue;
        const double tau1 = elapsed;
        // the absorbing 0 joins the window around 1 on the descent
        double w = r;
        while (w > 0.0) {
            if (elapsed >= t_cap) {
                out_of_time = true;
                break;
            }
            const double d = std::max(std::min(std::abs(w - 1.0) - eps, w), 0.0);
            const double h = banded_step(dt, d, t_cap - elapsed);
            w += std::sqrt(h) * rng.normal();
            elapsed += h;
            if (std::abs(w - 1.0) < eps)
                occ += h;
        }
        if (out_of_time)
            continue;
        ExcursionStats s;
        s.ell1 = occ / (2.0 * eps);
        s.tau1 = tau1;
        s.length = elapsed;
        return s;
    }
}

PathGrid conditioned_excursion_rejection(double dt, double start_height, RngStream& rng,
                                         double t_cap) {
    check_excursion_args(dt, t_cap);
    if (!(start_height > 0.0) || !(start_height < 1.0))
        throw std::invalid_argument("conditioned excursion: start height must lie in (0, 1)");
    const double sigma = std::sqrt(dt);
    const std::int64_t budget = static_cast<std::int64_t>(t_cap / dt);
    PathGrid p;
    p.dt = dt;
    p.origin_index = 0;
    for (;;) {
        p.values.assign(1, start_height);
        double w = start_height;
        bool hit1 = false;
        bool ok = true;
        while (w > 0.0) {
            if (static_cast<std::int64_t>(p.values.size()) > budget) {
                ok = false;
                break;
            }
            w += sigma * rng.normal();
            p.values.push_back(w);
            if (w >= 1.0)
                hit1 = true;
        }
        if (ok && hit1)
            return p;
    }
}

SegmentScanner::SegmentScanner(double eps_loc) : eps_(eps_loc) {
    if (!(eps_loc > 0.0))
        throw std::invalid_argument("segment scanner: window must be positive");
}

void SegmentScanner::consume(double step, double v) {
    const bool gap = (v <= 0.0);
    if (!started_ || gap != cur_.is_gap) {
        if (started_)
            done_.push_back(cur_);
        started_ = true;
        cur_.is_gap = gap;
        cur_.extreme = v;
        cur_.near_zero_time = 0.0;
    } else if (gap ? (v < cur_.extreme) : (v > cur_.extreme)) {
        cur_.extreme = v;
    }
    if (std::abs(v) < eps_)
        cur_.near_zero_time += step;
}

std::vector<ExcursionSegment> SegmentScanner::take() {
    if (started_) {
        done_.push_back(cur_);
        started_ = false;
    }
    return std::move(done_);
}

namespace {

// Joins the two outward side scans of a straddle walk into one chronological
// scan. The sides arrive in consumption order (origin outward), so the left
// one is reversed; both were seeded with the origin sample, whose occupation
// weight is carried on the left copy only so the merge counts it once.
StraddleScan stitch_straddle(std::vector<ExcursionSegment> left,
                             std::vector<ExcursionSegment> right, double dt,
                             double eps_loc) {
    std::reverse(left.begin(), left.end());
    StraddleScan out;
    out.dt = dt;
    out.eps_loc = eps_loc;
    out.center = left.size() - 1;
    ExcursionSegment& mid = left.back();
    mid.extreme = std::min(mid.extreme, right.front().extreme);
    mid.near_zero_time += right.front().near_zero_time;
    out.segments = std::move(left);
    out.segments.insert(out.segments.end(), right.begin() + 1, right.end());
    return out;
}

} // namespace

StraddleScan scan_straddle_bm(double dt, RngStream& rng, std::int64_t max_steps) {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("straddle scan: dt must be positive");
    if (max_steps < 1)
        throw std::invalid_argument("straddle scan: step budget must be positive");
    const double sigma = std::sqrt(dt);
    const double eps = 2.0 * sigma;
    SegmentScanner side[2] = {SegmentScanner(eps), SegmentScanner(eps)};
    std::int64_t used = 0;
    for (int s = 0; s < 2; ++s) {
        side[s].consume(s == 0 ? dt : 0.0, 0.0);
        double w = 0.0;
        for (;;) {
            if (++used > max_steps)
                throw resource_error("straddle scan: no level crossing within the step budget");
            w += sigma * rng.normal();
            side[s].consume(dt, w);
            if (w <= -1.0)
                break;
        }
    }
    std::vector<ExcursionSegment> left = side[0].take();
    std::vector<ExcursionSegment> right = side[1].take();
    return stitch_straddle(std::move(left), std::move(right), dt, eps);
}

CoupledStraddle scan_straddle_bm_coupled(double dt, int refine, RngStream& rng,
                                         std::int64_t max_steps) {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("straddle scan: dt must be positive");
    if (refine < 1)
        throw std::invalid_argument("straddle scan: refine must be at least 1");
    if (max_steps < 1)
        throw std::invalid_argument("straddle scan: step budget must be positive");
    const double sigma = std::sqrt(dt);
    const double fdt = dt / refine;
    const double ceps = 2.0 * sigma;
    const double feps = 2.0 * std::sqrt(fdt);
    SegmentScanner cside[2] = {SegmentScanner(ceps), SegmentScanner(ceps)};
    SegmentScanner fside[2] = {SegmentScanner(feps), SegmentScanner(feps)};
    std::int64_t used = 0;
    for (int s = 0; s < 2; ++s) {
        cside[s].consume(s == 0 ? dt : 0.0, 0.0);
        fside[s].consume(s == 0 ? fdt : 0.0, 0.0);
        double w = 0.0;
        // the fine grid contains the coarse one, so it crosses no later; once
        // it has, the remaining bridge fills influence nothing and are skipped
        bool fine_open = true;
        for (;;) {
            if (++used > max_steps)
                throw resource_error("straddle scan: no level crossing within the step budget");
            const double jump = sigma * rng.normal();
            if (fine_open && refine > 1) {
                double x = 0.0; // bridge offset from w, pinned to jump at dt
                for (int k = 1; k < refine && fine_open; ++k) {
                    const double left = dt - (k - 1) * fdt;
                    const double mean = x + (jump - x) * (fdt / left);
                    const double var = fdt * (left - fdt) / left;
                    x = mean + std::sqrt(var) * rng.normal();
                    fside[s].consume(fdt, w + x);
                    if (w + x <= -1.0)
                        fine_open = false;
                }
            }
            w += jump;
            if (fine_open) {
                fside[s].consume(fdt, w);
                if (w <= -1.0)
                    fine_open = false;
            }
            cside[s].consume(dt, w);
            if (w <= -1.0)
                break;
        }
    }
    CoupledStraddle out;
    out.coarse = stitch_straddle(cside[0].take(), cside[1].take(), dt, ceps);
    out.fine = stitch_straddle(fside[0].take(), fside[1].take(), fdt, feps);
    return out;
}

StraddleScan scan_values(const std::vector<double>& v, double dt, std::size_t center_sample) {
    if (v.empty())
        throw std::invalid_argument("segment scan: empty path");
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("segment scan: dt must be positive");
    StraddleScan out;
    out.dt = dt;
    out.eps_loc = 2.0 * std::sqrt(dt);
    out.center = kNoCenter;
    SegmentScanner sc(out.eps_loc);
    for (std::size_t i = 0; i < v.size(); ++i) {
        sc.consume(dt, v[i]);
        if (i == center_sample)
            out.center = sc.open_index();
    }
    out.segments = sc.take();
    return out;
}

double scan_local_time(const StraddleScan& scan) {
    if (!(scan.eps_loc > 0.0))
        throw std::invalid_argument("segment scan: bad window");
    double occ = 0.0;
    for (const ExcursionSegment& seg : scan.segments)
        occ += seg.near_zero_time;
    return occ / (2.0 * scan.eps_loc);
}

double straddle_local_time_banded(double dt, RngStream& rng, double max_time) {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("straddle scan: dt must be positive");
    if (!(max_time > 0.0))
        throw std::invalid_argument("straddle scan: time budget must be positive");
    const double eps = 2.0 * std::sqrt(dt);
    double occ = dt; // the origin sample, counted once as in the full scan
    double elapsed = 0.0;
    for (int side = 0; side < 2; ++side) {
        double w = 0.0;
        for (;;) {
            if (elapsed >= max_time)
                throw resource_error("straddle scan: no level crossing within the time budget");
            const double d = std::max(std::min(std::abs(w) - eps, w + 1.0), 0.0);
            const double h = banded_step(dt, d, max_time - elapsed);
            w += std::sqrt(h) * rng.normal();
            elapsed += h;
            if (std::abs(w) < eps)
                occ += h;
            if (w <= -1.0)
                break;
        }
    }
    return occ / (2.0 * eps);
}

Dendrogram space_from_scan(const StraddleScan& scan, std::int32_t max_points,
                           RngStream* order_rng) {
    if (scan.segments.empty())
        throw std::invalid_argument("segment scan: empty");
    if (!(scan.dt > 0.0) || !(scan.eps_loc > 0.0))
        throw std::invalid_argument("segment scan: bad dt or window");
    const double merge_tol = 2.0 * std::sqrt(scan.dt);

    // Leaves are runs of positive segments joined across dips shallower than
    // the grid tolerance; deeper dips separate leaves at their depth. Every
    // segment's near-level occupation lands in exactly one leaf: own and
    // absorbed-dip time stays put, separator time splits evenly between the
    // flanking leaves, window-boundary time joins the nearest leaf.
    std::vector<double> raw;
    std::vector<double> seps;
    std::vector<std::size_t> group_of(scan.segments.size(), 0);
    double pending = 0.0;
    double pending_sep = -1.0;
    bool open = false;
    for (std::size_t s = 0; s < scan.segments.size(); ++s) {
        const ExcursionSegment& seg = scan.segments[s];
        if (!seg.is_gap) {
            if (!open) {
                if (!raw.empty())
                    seps.push_back(pending_sep);
                raw.push_back(pending);
                pending = 0.0;
                open = true;
            }
            raw.back() += seg.near_zero_time;
            group_of[s] = raw.size() - 1;
            continue;
        }
        const double depth = -seg.extreme;
        if (!open) {
            pending += seg.near_zero_time;
            group_of[s] = 0;
        } else if (depth < merge_tol) {
            raw.back() += seg.near_zero_time;
            group_of[s] = raw.size() - 1;
        } else {
            raw.back() += 0.5 * seg.near_zero_time;
            pending = 0.5 * seg.near_zero_time;
            pending_sep = depth;
            group_of[s] = raw.size();
            open = false;
        }
    }
    if (raw.empty()) {
        // the window never rises above the level: a lone point carrying all
        // the near-level occupation
        return Dendrogram::single_leaf(pending / (2.0 * scan.eps_loc));
    }
    const std::size_t ng = raw.size();
    if (!open) {
        // the scan ended on a separator-deep dip, which is really the window
        // boundary: its full occupation belongs to the last leaf
        raw.back() += pending;
        for (std::size_t s = scan.segments.size(); s-- > 0 && group_of[s] == ng;)
            group_of[s] = ng - 1;
    }

    Dendrogram d = dendrogram_from_linear_gaps(seps);
    d.mass.resize(ng);
    for (std::size_t g = 0; g < ng; ++g)
        d.mass[g] = raw[g] / (2.0 * scan.eps_loc);
    if (scan.center < scan.segments.size())
        d.point = static_cast<std::int32_t>(group_of[scan.center]);

    if (order_rng != nullptr) {
        // size-biased order of the leaves by mass; rank 0 becomes the point
        // when the scan carries none of its own
        d.leaf_label.assign(ng, -1);
        std::vector<double> w(raw);
        double left = 0.0;
        for (double x : w)
            left += x;
        for (std::size_t rank = 0; rank < ng; ++rank) {
            const double u = order_rng->uniform();
            std::size_t g = 0;
            if (left > 0.0) {
                double target = u * left;
                while (g + 1 < ng && (w[g] <= 0.0 || target > w[g])) {
                    if (w[g] > 0.0)
                        target -= w[g];
                    ++g;
                }
                while (w[g] <= 0.0 && g > 0)
                    --g;
            } else {
                while (g < ng && w[g] < 0.0)
                    ++g;
            }
            // fall back to the first unlabeled leaf if rounding walked past
            if (g >= ng || w[g] < 0.0) {
                g = 0;
                while (w[g] < 0.0)
                    ++g;
            }
            d.leaf_label[g] = static_cast<std::int64_t>(rank);
            left -= std::max(w[g], 0.0);
            w[g] = -1.0;
            if (rank == 0 && scan.center >= scan.segments.size())
                d.point = static_cast<std::int32_t>(g);
        }
    }
    if (max_points > 0 && d.leaf_count > max_points)
        d = truncate_by_mass(d, max_points);
    d.validate();
    return d;
}

Dendrogram evans_space_from_excursion(const PathGrid& f, std::int32_t max_points,
                                      RngStream& rng) {
    if (f.values.empty())
        throw std::invalid_argument("evans space: empty path");
    if (*std::max_element(f.values.begin(), f.values.end()) < 1.0)
        throw std::invalid_argument("evans space: the path never reaches 1");
    std::vector<double> v(f.values.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = f.values[i] - 1.0;
    return space_from_scan(scan_values(v, f.dt), max_points, &rng);
}

Dendrogram limit_space_from_W(const PathGrid& w, std::int32_t max_points) {
    PathGrid y = straddling_excursion(w, -1.0);
    // y - 1 recovers w inside the window; leaves are w's upcrossing runs of 0
    std::vector<double> v(y.values.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = y.values[i] - 1.0;
    return space_from_scan(scan_values(v, y.dt, static_cast<std::size_t>(y.origin_index)),
                           max_points, nullptr);
}

Dendrogram limit_space_from_zeros(const PathGrid& w, std::int32_t max_points) {
    const std::vector<double>& v = w.values;
    if (v.empty())
        throw std::invalid_argument("limit space: empty path");
    const std::int64_t n = static_cast<std::int64_t>(v.size());
    if (w.origin_index < 0 || w.origin_index >= n)
        throw std::invalid_argument("limit space: origin outside the path");
    if (v[static_cast<std::size_t>(w.origin_index)] > 0.0)
        throw std::invalid_argument("limit space: the path is positive at the origin");
    // window around the origin until the path first reaches +1 on each side
    std::int64_t lo = w.origin_index;
    std::int64_t hi = w.origin_index;
    while (lo > 0 && v[static_cast<std::size_t>(lo)] < 1.0)
        --lo;
    while (hi < n - 1 && v[static_cast<std::size_t>(hi)] < 1.0)
        ++hi;
    if (v[static_cast<std::size_t>(lo)] < 1.0 || v[static_cast<std::size_t>(hi)] < 1.0)
        throw std::invalid_argument("limit space: no crossing of level 1 on both sides");

    // Points are the nonpositive stretches, at distance sup of the path
    // between them; stretches with no intervening rise above the grid
    // tolerance collapse together. Occupation near 0 follows the same
    // attribution as the excursion build: absorbed rises stay put, separating
    // rises split evenly, boundary rises join the nearest stretch.
    const double eps_loc = 2.0 * std::sqrt(w.dt);
    const double tol = 2.0 * std::sqrt(w.dt);
    std::vector<double> raw;
    std::vector<double> seps;
    std::int32_t point_group = -1;
    double cur = 0.0;
    double pk_max = 0.0;
    double pk_occ = 0.0;
    bool in_peak = false;
    bool seen_leaf = false;
    for (std::int64_t i = lo; i <= hi; ++i) {
        const double x = v[static_cast<std::size_t>(i)];
        const double nz = (std::abs(x) < eps_loc) ? w.dt : 0.0;
        if (x > 0.0) {
            in_peak = true;
            pk_max = std::max(pk_max, x);
            pk_occ += nz;
            continue;
        }
        if (in_peak) {
            if (!seen_leaf || pk_max < tol) {
                cur += pk_occ;
            } else {
                raw.push_back(cur + 0.5 * pk_occ);
                seps.push_back(pk_max);
                cur = 0.5 * pk_occ;
            }
            in_peak = false;
            pk_max = 0.0;
            pk_occ = 0.0;
        }
        seen_leaf = true;
        cur += nz;
        if (i == w.origin_index)
            point_group = static_cast<std::int32_t>(raw.size());
    }
    if (in_peak)
        cur += pk_occ;
    raw.push_back(cur);

    Dendrogram d = dendrogram_from_linear_gaps(seps);
    d.mass.resize(raw.size());
    for (std::size_t g = 0; g < raw.size(); ++g)
        d.mass[g] = raw[g] / (2.0 * eps_loc);
    d.point = point_group;
    if (max_points > 0 && d.leaf_count > max_points)
        d = truncate_by_mass(d, max_points);
    d.validate();
    return d;
}

double time_change_V(const LocalTimeProfile& profile, double t) {
    if (!(t >= 0.0) || !(t <= 1.0))
        throw std::invalid_argument("time change: t must lie in [0, 1]");
    if (t == 0.0)
        return 0.0;
    const double a = 1.0 - t;
    std::vector<double> xs{a};
    for (double x : profile.levels)
        if (x > a && x < 1.0)
            xs.push_back(x);
    xs.push_back(1.0);
    double acc = 0.0;
    double prev_x = xs[0];
    double prev_f = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double z = profile.at(xs[k]);
        if (!(z > 0.0))
            throw std::invalid_argument("time change: no local time attained in the range");
        const double f = 4.0 / z;
        if (k > 0)
            acc += 0.5 * (prev_f + f) * (xs[k] - prev_x);
        prev_x = xs[k];
        prev_f = f;
    }
    return acc;
}

double t_epsilon(const LocalTimeProfile& profile, double epsilon) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw std::invalid_argument("t_epsilon: epsilon must lie in (0, 1)");
    const double z = profile.at(1.0 - std::sqrt(epsilon));
    if (!(z > 0.0))
        throw std::invalid_argument("t_epsilon: no local time at the reference level");
    return std::max(4.0 / (epsilon * z), 1.0 / std::sqrt(epsilon));
}

ScaledFamily scaled_excursion_family(const PathGrid& x, double epsilon,
                                     const LocalTimeProfile& profile, RngStream& rng) {
    if (x.values.empty())
        throw std::invalid_argument("scaled family: empty path");
    ScaledFamily fam;
    fam.t_eps = t_epsilon(profile, epsilon);
    const double t = fam.t_eps;
    // diffusive rescaling is a pure reindexing: value v at step k of x becomes
    // 1 + (v-1)*t at step k of a grid with spacing dt*t^2
    const double sdt = x.dt * t * t;
    std::vector<double> sv(x.values.size());
    for (std::size_t i = 0; i < sv.size(); ++i)
        sv[i] = 1.0 + (x.values[i] - 1.0) * t;

    std::vector<double> weights;
    std::size_t i = 0;
    while (i < sv.size()) {
        if (sv[i] <= 0.0) {
            ++i;
            continue;
        }
        std::size_t j = i;
        double mx = 0.0;
        while (j < sv.size() && sv[j] > 0.0) {
            mx = std::max(mx, sv[j]);
            ++j;
        }
        if (mx >= 1.0) {
            // keep one bracketing sample on each side where the path has one
            const std::size_t a = (i > 0) ? i - 1 : i;
            const std::size_t b = (j < sv.size()) ? j + 1 : j;
            PathGrid e;
            e.dt = sdt;
            e.origin_index = 0;
            e.values.assign(sv.begin() + static_cast<std::ptrdiff_t>(a),
                            sv.begin() + static_cast<std::ptrdiff_t>(b));
            weights.push_back(local_time_at(e, 1.0));
            fam.excursions.push_back(std::move(e));
        }
        i = j;
    }
    if (fam.excursions.empty())
        throw std::logic_error("scaled family: no excursion reaches level 1");

    double total = 0.0;
    for (double wgt : weights)
        total += wgt;
    const double u = rng.uniform();
    std::size_t pick = 0;
    if (total > 0.0) {
        double target = u * total;
        while (pick + 1 < weights.size() && target > weights[pick]) {
            target -= weights[pick];
            ++pick;
        }
    } else {
        pick = std::min(static_cast<std::size_t>(u * static_cast<double>(weights.size())),
                        weights.size() - 1);
    }
    fam.pick = pick;
    fam.y = fam.excursions[pick];
    return fam;
}

double excursion_hausdorff_law(double ell_gap, double eta, std::int64_t reps,
                               RngStream& rng) {
    if (!(ell_gap >= 0.0))
        throw std::invalid_argument("hausdorff law: ell_gap must be nonnegative");
    if (!(eta > 0.0))
        throw std::invalid_argument("hausdorff law: eta must be positive");
    if (reps < 1)
        throw std::invalid_argument("hausdorff law: reps must be positive");
    // excursions dipping more than eta below the level arrive along local
    // time at rate 1/eta; the space is within eta iff none arrive
    std::int64_t clear = 0;
    for (std::int64_t k = 0; k < reps; ++k)
        if (rng.poisson(ell_gap / eta) == 0)
            ++clear;
    return static_cast<double>(clear) / static_cast<double>(reps);
}

} // namespace nearzero
