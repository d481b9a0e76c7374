#pragma once

#include <cstdint>
#include <vector>

#include "nearzero/dendrogram.hpp"
#include "nearzero/path_grid.hpp"
#include "nearzero/rng.hpp"

namespace nearzero {

// Occupation-density local time along a level grid: values[i] estimates the
// local time of the path at levels[i] with window eps = window_scale*sqrt(dt),
// as dt * #{samples within eps} / (2 eps). Levels are kept sorted.
struct LocalTimeProfile {
    std::vector<double> levels;
    std::vector<double> values;

    // linear interpolation; throws outside the tabulated range
    double at(double level) const;
};

LocalTimeProfile local_time_profile(const PathGrid& path, std::vector<double> levels,
                                    double window_scale = 2.0);
double local_time_at(const PathGrid& path, double level, double window_scale = 2.0);

// Excursion from 0 that reaches 1 and returns to 0, built as the radial part
// of a 3d Brownian motion run from 0 to its first passage of 1, followed by a
// Brownian descent killed at 0. Attempts longer than t_cap are rediscarded and
// resampled, which truncates the (heavy-tailed) duration law; t_cap is kept
// configurable so comparisons can cap both sides identically.
PathGrid conditioned_excursion(double dt, RngStream& rng, double t_cap = 1600.0);

// Slow oracle for the same law: Brownian motion from start_height killed at 0,
// kept only when it reaches 1 first. Exact as start_height -> 0.
PathGrid conditioned_excursion_rejection(double dt, double start_height, RngStream& rng,
                                         double t_cap = 1600.0);

// Same sampler reduced on the fly to its level-1 statistics, for small dt
// where holding the path is wasteful. Draw-for-draw identical to
// conditioned_excursion, with the occupation window fixed at 2*sqrt(dt).
struct ExcursionStats {
    double ell1 = 0.0;   // local time at level 1
    double tau1 = 0.0;   // first time at or above 1
    double length = 0.0; // lifetime
};
ExcursionStats conditioned_excursion_stats(double dt, RngStream& rng,
                                           double t_cap = 1600.0);

// Same statistics with the step opened up whenever the walk is far from every
// level they read (1 throughout, plus the absorbing 0 on the descent). A step
// at distance d from the nearest such level uses max(dt, (d/6)^2), so the dt
// grid is restored inside a 6*sqrt(dt) buffer around each level and clearing
// a gap in one step stays a six sigma event; Gaussian increments keep the
// sampled path exact at any step size, so the reported laws agree with the
// uniform grid. Orders of magnitude cheaper at small dt. The path maximum is
// not reported: sparse far-field sampling would understate it.
ExcursionStats conditioned_excursion_stats_banded(double dt, RngStream& rng,
                                                  double t_cap = 1600.0);

// Maximal runs of one sign of a centred stream v (positive runs carry the
// excursions above the reference level, gaps the dips below). extreme is the
// run's max (positive runs) or min (gaps); near_zero_time the occupation of
// |v| < eps_loc inside the run.
struct ExcursionSegment {
    bool is_gap = true;
    double extreme = 0.0;
    double near_zero_time = 0.0;
};

class SegmentScanner {
  public:
    explicit SegmentScanner(double eps_loc);
    void consume(double step, double v);
    // index the currently open segment will take once flushed
    std::size_t open_index() const { return done_.size(); }
    std::vector<ExcursionSegment> take();

  private:
    double eps_ = 0.0;
    bool started_ = false;
    ExcursionSegment cur_;
    std::vector<ExcursionSegment> done_;
};

// One straddling-excursion window in segment form. `center` indexes the
// segment holding the time origin; segments strictly alternate sign and the
// first and last ones are the boundary dips that closed the window.
struct StraddleScan {
    std::vector<ExcursionSegment> segments;
    std::size_t center = 0;
    double dt = 0.0;
    double eps_loc = 0.0;
};

// Straddling window of a fresh two-sided Brownian motion above -1, generated
// increment by increment so nothing but the segments is ever stored.
StraddleScan scan_straddle_bm(double dt, RngStream& rng,
                              std::int64_t max_steps = 2000000000);

// Straddle scan of one Brownian path at two resolutions: the fine grid
// refines each coarse step with refine - 1 Brownian bridge samples, so grid
// resolution is the only difference between the two scans. With refine = 1
// both scans equal scan_straddle_bm on the same stream, draw for draw.
// max_steps counts coarse steps.
struct CoupledStraddle {
    StraddleScan coarse;
    StraddleScan fine;
};
CoupledStraddle scan_straddle_bm_coupled(double dt, int refine, RngStream& rng,
                                         std::int64_t max_steps = 2000000000);

// Segment scan of materialized values (already centred: v = path - level).
// center_sample out of range means the scan carries no distinguished point.
StraddleScan scan_values(const std::vector<double>& v, double dt,
                         std::size_t center_sample = static_cast<std::size_t>(-1));

// Local time of the scanned path at the reference level: total near-level
// occupation over 2*eps_loc.
double scan_local_time(const StraddleScan& scan);

// scan_local_time(scan_straddle_bm(dt, rng, max_time / dt)) without the rest
// of the scan, using the far-field step schedule of
// conditioned_excursion_stats_banded (levels 0 and -1 matter here). max_time
// budgets total simulated time across both sides; exhausting it throws
// resource_error, matching the full scan's step budget. Segments are
// deliberately not produced: their extremes would need the uniform grid.
double straddle_local_time_banded(double dt, RngStream& rng, double max_time);

// Ultrametric space of the positive runs of a scan: leaves are runs merged
// across dips shallower than 2*sqrt(dt), heights the remaining dip depths,
// masses the attributed near-level occupation over 2*eps_loc. The point is
// the leaf nearest the scan center. order_rng, when given, draws the
// mass-weighted leaf order into leaf_label. max_points > 0 keeps only the
// heaviest leaves.
Dendrogram space_from_scan(const StraddleScan& scan, std::int32_t max_points = 0,
                           RngStream* order_rng = nullptr);

// Evans space of an excursion f that reaches 1: leaves are the excursions of
// f above 1, d(i,j) = 1 - inf f between them, leaf masses the local time of f
// at level 1 attributed per leaf.
Dendrogram evans_space_from_excursion(const PathGrid& f, std::int32_t max_points,
                                      RngStream& rng);

// Unit ball of the Brownian limit space around the origin: the straddling
// excursion of W above -1, run through evans_space_from_excursion, pointed
// at the leaf nearest the origin.
Dendrogram limit_space_from_W(const PathGrid& w, std::int32_t max_points = 0);

// Same space built the other way around: zero stretches of W inside the
// window where W stays below 1, at distance sup W between them, quotiented
// by merging stretches with no intervening peak above 2*sqrt(dt). Kept
// independent of space_from_scan as a cross-construction check.
Dendrogram limit_space_from_zeros(const PathGrid& w, std::int32_t max_points = 0);

// V(t) = integral of 4/Z_v over v in [1-t, 1], by trapezoid on the level grid.
double time_change_V(const LocalTimeProfile& profile, double t);

// T_eps = 4/(eps * Z_{1-sqrt(eps)}) or 1/sqrt(eps), whichever is larger.
double t_epsilon(const LocalTimeProfile& profile, double epsilon);

// Diffusive rescaling of an excursion by T_eps and its level-0-to-1
// excursions; y is drawn among them with local-time-at-1 weights.
struct ScaledFamily {
    std::vector<PathGrid> excursions;
    PathGrid y;
    std::size_t pick = 0;
    double t_eps = 0.0;
};
ScaledFamily scaled_excursion_family(const PathGrid& x, double epsilon,
                                     const LocalTimeProfile& profile, RngStream& rng);

// Frequency of "no excursion deeper than eta below the level within a local
// time window ell_gap", sampled from the Poisson count with mean ell_gap/eta.
double excursion_hausdorff_law(double ell_gap, double eta, std::int64_t reps,
                               RngStream& rng);

} // namespace nearzero
