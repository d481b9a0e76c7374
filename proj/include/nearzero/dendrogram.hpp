#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nearzero {

// Rooted merge tree over leaves 0..leaf_count-1, representing a finite
// ultrametric space: the distance between two leaves is the height of their
// lowest common ancestor. Node ids list the leaves first, then the internal
// nodes in nondecreasing height order, so a parent id always exceeds its
// children's ids. parent[root] = -1. Internal nodes have at least two
// children. Leaf masses and external labels are optional.
struct Dendrogram {
    std::int32_t leaf_count = 0;
    std::vector<std::int32_t> parent;
    std::vector<double> height; // internal nodes only, height[v - leaf_count]
    std::int32_t point = 0;     // distinguished leaf
    std::vector<double> mass;
    std::vector<std::int64_t> leaf_label;

    std::int32_t node_count() const { return static_cast<std::int32_t>(parent.size()); }
    bool is_leaf(std::int32_t v) const { return v < leaf_count; }
    double node_height(std::int32_t v) const;
    std::int32_t root() const;
    double distance(std::int32_t i, std::int32_t j) const;
    double diameter() const;
    // Max distance from the distinguished leaf to any leaf.
    double radius_about_point() const;
    void validate() const;

    static Dendrogram single_leaf(double mass = -1.0, std::int64_t label = -1);
};

// Multiply all heights by factor > 0.
Dendrogram rescale(const Dendrogram& d, double factor);

// Closed-ball partition at the given radius. The ball containing center comes
// first; the rest follow ordered by their smallest original leaf index. Leaf
// labels in the pieces default to original leaf indices when the input has no
// labels of its own.
std::vector<Dendrogram> ball_decomposition(const Dendrogram& d,
                                           std::int32_t center, double radius);

// Number of closed balls of the given radius (size of the partition).
std::int64_t ball_count(const Dendrogram& d, double radius);

// Quotient space whose points are the closed eta-balls; masses sum within a
// ball. Distances of at least eta are preserved exactly.
Dendrogram space_from_balls(const Dendrogram& d, double eta);

// Keep the distinguished leaf plus the heaviest remaining leaves, at most
// max_leaves total; each dropped leaf's mass moves to a nearest kept leaf.
Dendrogram truncate_by_mass(const Dendrogram& d, std::int32_t max_leaves);

// Ultrametric tree over n+1 linearly ordered leaves from the n separating
// gap depths: d(i,j) = max gap depth strictly between leaves i and j.
Dendrogram dendrogram_from_linear_gaps(const std::vector<double>& gaps);

// Line-based text form; round-trips doubles exactly.
std::string serialize_dendrogram(const Dendrogram& d);
Dendrogram parse_dendrogram(const std::string& text);
void write_dendrogram(const Dendrogram& d, const std::string& file);
Dendrogram read_dendrogram(const std::string& file);

} // namespace nearzero
