#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nearzero/rng.hpp"

namespace nearzero {

// Uniform-grid sample of a continuous path. values[k] sits at time
// (k - origin_index) * dt, so origin_index > 0 marks a two-sided path.
struct PathGrid {
    double dt = 0.0;
    std::int64_t origin_index = 0;
    std::vector<double> values;

    std::int64_t size() const { return static_cast<std::int64_t>(values.size()); }
    double time_at(std::int64_t k) const {
        return (static_cast<double>(k) - static_cast<double>(origin_index)) * dt;
    }
    double value_origin() const { return values[static_cast<std::size_t>(origin_index)]; }
};

// Two-sided Brownian motion on [-T, T]: W(0) = 0, independent N(0, dt)
// increments on each side of the origin.
PathGrid simulate_two_sided_bm(double T, double dt, RngStream& rng);

// The excursion of `path` above `level` straddling the origin, clipped at the
// first grid sample at or below the level on each side and shifted so the
// window starts at index 0 with values path - level. The returned grid keeps
// origin_index pointing at the original time origin. Throws when either side
// stays above the level.
PathGrid straddling_excursion(const PathGrid& path, double level = -1.0);

// Same excursion without materializing the full two-sided path first: each
// side is grown until it crosses the level, up to max_steps samples per side.
PathGrid straddling_excursion_adaptive(double dt, RngStream& rng, double level = -1.0,
                                       std::int64_t max_steps = 500000000);

// Midpoint refinement: halves dt by inserting Brownian-bridge samples,
// leaving the original samples in place.
PathGrid refine_bridge(const PathGrid& path, RngStream& rng);

// CSV of (index, value) rows at `base`.csv plus a JSON sidecar `base`.json
// holding dt, origin_index and the seed that produced the path.
void write_path(const PathGrid& path, const std::string& base, std::uint64_t seed = 0);
PathGrid read_path(const std::string& base);

} // namespace nearzero
