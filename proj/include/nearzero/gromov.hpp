#pragma once

#include "nearzero/dendrogram.hpp"

namespace nearzero {

struct GhBounds {
    double lower;
    double upper;
};

// Exact Gromov-Hausdorff distance between the leaf metrics, by branch and
// bound over correspondences. Refuses when the combined leaf count exceeds
// size_cap; use gh_bounds for larger spaces.
double gh_exact(const Dendrogram& x, const Dendrogram& y, int size_cap = 16);

// Cheap two-sided bounds valid for any sizes. The lower bound combines the
// diameter gap with a ball-covering count argument; the upper bound comes
// from a greedy correspondence, coarsened first when the spaces are large.
GhBounds gh_bounds(const Dendrogram& x, const Dendrogram& y);

// Exact Prokhorov distance between two mass assignments living on the same
// tree. x and y must have identical leaf sets and merge structure; only the
// masses may differ.
double prokhorov(const Dendrogram& x, const Dendrogram& y);

// Pointed comparison: sum over integer radii n >= 1 of 2^-n (1 and gh of the
// closed n-balls about the distinguished leaves, whichever smaller). The
// series is finite because balls saturate at the space radius. Ball terms
// fall back to the gh_bounds upper bound beyond the exact-size cap.
double pointed_gh(const Dendrogram& x, const Dendrogram& y, int size_cap = 16);

// Pointed metric-measure comparison: same series with each ball term replaced
// by an upper bound on the measured distance: correspondences found by the
// gh machinery give the Hausdorff part, and the Prokhorov part is evaluated
// exactly in the glued space. Requires masses on both sides.
double pointed_ghp(const Dendrogram& x, const Dendrogram& y, int size_cap = 12);

} // namespace nearzero
