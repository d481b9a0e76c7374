#include "nearzero/dendrogram.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace nearzero {

namespace {

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error("bad numeric field: " + s);
    return v;
}

std::vector<std::int32_t> child_counts(const Dendrogram& d) {
    std::vector<std::int32_t> counts(d.parent.size(), 0);
    for (std::int32_t v = 0; v < d.node_count(); ++v)
        if (d.parent[static_cast<std::size_t>(v)] >= 0)
            ++counts[static_cast<std::size_t>(d.parent[static_cast<std::size_t>(v)])];
    return counts;
}

// Subtree roots of the closed-ball partition at the given radius, in node id
// order: nodes of height <= radius whose parent (if any) sits above radius.
std::vector<std::int32_t> partition_roots(const Dendrogram& d, double radius) {
    std::vector<std::int32_t> roots;
    for (std::int32_t v = 0; v < d.node_count(); ++v) {
        if (d.node_height(v) > radius)
            continue;
        std::int32_t p = d.parent[static_cast<std::size_t>(v)];
        if (p < 0 || d.node_height(p) > radius)
            roots.push_back(v);
    }
    return roots;
}

// Restriction of the tree to a subset of its leaves. Kept leaves are
// renumbered in ascending original order; internal nodes with fewer than two
// surviving child branches collapse away. old_to_new reports the new leaf ids
// (-1 for dropped leaves).
Dendrogram induce_on_leaves(const Dendrogram& d, const std::vector<char>& keep,
                            std::vector<std::int32_t>& old_to_new) {
    Dendrogram out;
    old_to_new.assign(static_cast<std::size_t>(d.leaf_count), -1);

    std::int32_t kept = 0;
    for (std::int32_t i = 0; i < d.leaf_count; ++i)
        if (keep[static_cast<std::size_t>(i)])
            old_to_new[static_cast<std::size_t>(i)] = kept++;
    if (kept == 0)
        throw std::invalid_argument("induce_on_leaves: empty leaf subset");

    out.leaf_count = kept;
    out.parent.assign(static_cast<std::size_t>(kept), -1);
    if (!d.mass.empty())
        out.mass.assign(static_cast<std::size_t>(kept), 0.0);
    out.leaf_label.assign(static_cast<std::size_t>(kept), 0);
    for (std::int32_t i = 0; i < d.leaf_count; ++i) {
        std::int32_t ni = old_to_new[static_cast<std::size_t>(i)];
        if (ni < 0)
            continue;
        if (!d.mass.empty())
            out.mass[static_cast<std::size_t>(ni)] = d.mass[static_cast<std::size_t>(i)];
        out.leaf_label[static_cast<std::size_t>(ni)] =
            d.leaf_label.empty() ? i : d.leaf_label[static_cast<std::size_t>(i)];
    }

    // rep[v]: id in the induced tree standing for node v's kept content
    std::vector<std::int32_t> rep(d.parent.size(), -1);
    for (std::int32_t i = 0; i < d.leaf_count; ++i)
        rep[static_cast<std::size_t>(i)] = old_to_new[static_cast<std::size_t>(i)];

    std::vector<std::vector<std::int32_t>> children(d.parent.size());
    for (std::int32_t v = 0; v < d.node_count(); ++v)
        if (d.parent[static_cast<std::size_t>(v)] >= 0)
            children[static_cast<std::size_t>(d.parent[static_cast<std::size_t>(v)])].push_back(v);

    for (std::int32_t v = d.leaf_count; v < d.node_count(); ++v) {
        std::vector<std::int32_t> live;
        for (std::int32_t c : children[static_cast<std::size_t>(v)])
            if (rep[static_cast<std::size_t>(c)] >= 0)
                live.push_back(rep[static_cast<std::size_t>(c)]);
        if (live.empty())
            continue;
        if (live.size() == 1) {
            rep[static_cast<std::size_t>(v)] = live[0];
            continue;
        }
        std::int32_t id = out.node_count();
        out.parent.push_back(-1);
        out.height.push_back(d.node_height(v));
        for (std::int32_t c : live)
            out.parent[static_cast<std::size_t>(c)] = id;
        rep[static_cast<std::size_t>(v)] = id;
    }
    return out;
}

} // namespace

double Dendrogram::node_height(std::int32_t v) const {
    if (v < 0 || v >= node_count())
        throw std::invalid_argument("node_height: node id out of range");
    return v < leaf_count ? 0.0 : height[static_cast<std::size_t>(v - leaf_count)];
}

std::int32_t Dendrogram::root() const {
    for (std::int32_t v = node_count() - 1; v >= 0; --v)
        if (parent[static_cast<std::size_t>(v)] < 0)
            return v;
    throw std::logic_error("Dendrogram: no root");
}

double Dendrogram::distance(std::int32_t i, std::int32_t j) const {
    if (i < 0 || i >= leaf_count || j < 0 || j >= leaf_count)
        throw std::invalid_argument("distance: leaf id out of range");
    if (i == j)
        return 0.0;
    std::int32_t a = i, b = j;
    while (a != b) {
        // Parent ids exceed child ids, so walking the smaller id up converges
        // at the lowest common ancestor.
        if (a < b)
            a = parent[static_cast<std::size_t>(a)];
        else
            b = parent[static_cast<std::size_t>(b)];
        if (a < 0 || b < 0)
            throw std::logic_error("distance: leaves in different components");
    }
    return node_height(a);
}

double Dendrogram::diameter() const {
    return height.empty() ? 0.0 : height.back();
}

double Dendrogram::radius_about_point() const {
    double r = 0.0;
    for (std::int32_t i = 0; i < leaf_count; ++i)
        r = std::max(r, distance(point, i));
    return r;
}

void Dendrogram::validate() const {
    if (leaf_count < 1)
        throw std::logic_error("dendrogram: needs at least one leaf");
    if (node_count() != leaf_count + static_cast<std::int32_t>(height.size()))
        throw std::logic_error("dendrogram: node/height size mismatch");
    if (point < 0 || point >= leaf_count)
        throw std::logic_error("dendrogram: point out of range");
    if (!mass.empty() && static_cast<std::int32_t>(mass.size()) != leaf_count)
        throw std::logic_error("dendrogram: mass size mismatch");
    if (!leaf_label.empty() && static_cast<std::int32_t>(leaf_label.size()) != leaf_count)
        throw std::logic_error("dendrogram: label size mismatch");

    int roots = 0;
    auto counts = child_counts(*this);
    for (std::int32_t v = 0; v < node_count(); ++v) {
        std::int32_t p = parent[static_cast<std::size_t>(v)];
        if (p < 0) {
            ++roots;
            continue;
        }
        if (p <= v || p >= node_count())
            throw std::logic_error("dendrogram: parent must be a later node");
        if (node_height(p) < node_height(v))
            throw std::logic_error("dendrogram: heights must not decrease toward the root");
    }
    if (roots != 1)
        throw std::logic_error("dendrogram: must have exactly one root");
    for (std::int32_t v = leaf_count; v < node_count(); ++v) {
        if (!(node_height(v) > 0.0))
            throw std::logic_error("dendrogram: internal heights must be positive");
        if (counts[static_cast<std::size_t>(v)] < 2)
            throw std::logic_error("dendrogram: internal nodes need at least two children");
    }
    for (double m : mass)
        if (!(m >= 0.0) || !std::isfinite(m))
            throw std::logic_error("dendrogram: masses must be finite and nonnegative");
}

Dendrogram Dendrogram::single_leaf(double mass_value, std::int64_t label) {
    Dendrogram d;
    d.leaf_count = 1;
    d.parent = {-1};
    d.point = 0;
    if (mass_value >= 0.0)
        d.mass = {mass_value};
    if (label >= 0)
        d.leaf_label = {label};
    return d;
}

Dendrogram rescale(const Dendrogram& d, double factor) {
    if (!(factor > 0.0) || !std::isfinite(factor))
        throw std::invalid_argument("rescale: factor must be positive and finite");
    Dendrogram out = d;
    for (double& h : out.height)
        h *= factor;
    return out;
}

std::int64_t ball_count(const Dendrogram& d, double radius) {
    if (!(radius >= 0.0))
        throw std::invalid_argument("ball_count: radius must be nonnegative");
    auto counts = child_counts(d);
    std::int64_t balls = d.leaf_count;
    for (std::int32_t v = d.leaf_count; v < d.node_count(); ++v)
        if (d.node_height(v) <= radius)
            balls -= counts[static_cast<std::size_t>(v)] - 1;
    return balls;
}

std::vector<Dendrogram> ball_decomposition(const Dendrogram& d,
                                           std::int32_t center, double radius) {
    if (center < 0 || center >= d.leaf_count)
        throw std::invalid_argument("ball_decomposition: center must be a leaf");
    if (!(radius >= 0.0))
        throw std::invalid_argument("ball_decomposition: radius must be nonnegative");

    auto roots = partition_roots(d, radius);

    // leaf -> its ball root
    std::vector<std::int32_t> ball_of(static_cast<std::size_t>(d.leaf_count), -1);
    std::vector<std::vector<std::int32_t>> children(d.parent.size());
    for (std::int32_t v = 0; v < d.node_count(); ++v)
        if (d.parent[static_cast<std::size_t>(v)] >= 0)
            children[static_cast<std::size_t>(d.parent[static_cast<std::size_t>(v)])].push_back(v);
    for (std::int32_t r : roots) {
        std::vector<std::int32_t> stack{r};
        while (!stack.empty()) {
            std::int32_t v = stack.back();
            stack.pop_back();
            if (d.is_leaf(v))
                ball_of[static_cast<std::size_t>(v)] = r;
            else
                for (std::int32_t c : children[static_cast<std::size_t>(v)])
                    stack.push_back(c);
        }
    }

    std::int32_t center_root = ball_of[static_cast<std::size_t>(center)];
    // order the remaining balls by their smallest original leaf index
    std::vector<std::int32_t> min_leaf(d.parent.size(), -1);
    for (std::int32_t i = d.leaf_count - 1; i >= 0; --i)
        min_leaf[static_cast<std::size_t>(ball_of[static_cast<std::size_t>(i)])] = i;
    std::sort(roots.begin(), roots.end(), [&](std::int32_t a, std::int32_t b) {
        return min_leaf[static_cast<std::size_t>(a)] < min_leaf[static_cast<std::size_t>(b)];
    });
    std::vector<std::int32_t> ordered;
    ordered.push_back(center_root);
    for (std::int32_t r : roots)
        if (r != center_root)
            ordered.push_back(r);

    std::vector<Dendrogram> out;
    out.reserve(ordered.size());
    for (std::int32_t r : ordered) {
        std::vector<char> keep(static_cast<std::size_t>(d.leaf_count), 0);
        for (std::int32_t i = 0; i < d.leaf_count; ++i)
            if (ball_of[static_cast<std::size_t>(i)] == r)
                keep[static_cast<std::size_t>(i)] = 1;
        std::vector<std::int32_t> old_to_new;
        Dendrogram piece = induce_on_leaves(d, keep, old_to_new);
        piece.point = (r == center_root) ? old_to_new[static_cast<std::size_t>(center)] : 0;
        out.push_back(std::move(piece));
    }
    return out;
}

Dendrogram space_from_balls(const Dendrogram& d, double eta) {
    if (!(eta > 0.0))
        throw std::invalid_argument("space_from_balls: eta must be positive");

    auto roots = partition_roots(d, eta);
    std::int32_t n_balls = static_cast<std::int32_t>(roots.size());

    // map every node to the ball root below eta that contains it, if any
    std::vector<std::int32_t> ball_index(d.parent.size(), -1);
    for (std::int32_t b = 0; b < n_balls; ++b)
        ball_index[static_cast<std::size_t>(roots[static_cast<std::size_t>(b)])] = b;
    // propagate downward: nodes under a ball root inherit it
    for (std::int32_t v = d.node_count() - 1; v >= 0; --v) {
        std::int32_t p = d.parent[static_cast<std::size_t>(v)];
        if (p >= 0 && ball_index[static_cast<std::size_t>(v)] < 0)
            ball_index[static_cast<std::size_t>(v)] = ball_index[static_cast<std::size_t>(p)];
    }

    Dendrogram out;
    out.leaf_count = n_balls;
    out.parent.assign(static_cast<std::size_t>(n_balls), -1);
    if (!d.mass.empty())
        out.mass.assign(static_cast<std::size_t>(n_balls), 0.0);
    out.leaf_label.assign(static_cast<std::size_t>(n_balls), 0);

    // smallest original leaf per ball becomes its label; masses sum
    std::vector<std::int32_t> first_leaf(static_cast<std::size_t>(n_balls), -1);
    for (std::int32_t i = 0; i < d.leaf_count; ++i) {
        std::int32_t b = ball_index[static_cast<std::size_t>(i)];
        if (first_leaf[static_cast<std::size_t>(b)] < 0)
            first_leaf[static_cast<std::size_t>(b)] = i;
        if (!d.mass.empty())
            out.mass[static_cast<std::size_t>(b)] += d.mass[static_cast<std::size_t>(i)];
        if (i == d.point)
            out.point = b;
    }
    for (std::int32_t b = 0; b < n_balls; ++b)
        out.leaf_label[static_cast<std::size_t>(b)] =
            d.leaf_label.empty() ? first_leaf[static_cast<std::size_t>(b)]
                                 : d.leaf_label[static_cast<std::size_t>(first_leaf[static_cast<std::size_t>(b)])];

    // rep[v]: node id in the quotient standing for v (balls map to leaves)
    std::vector<std::int32_t> rep(d.parent.size(), -1);
    for (std::int32_t b = 0; b < n_balls; ++b)
        rep[static_cast<std::size_t>(roots[static_cast<std::size_t>(b)])] = b;

    std::vector<std::vector<std::int32_t>> children(d.parent.size());
    for (std::int32_t v = 0; v < d.node_count(); ++v)
        if (d.parent[static_cast<std::size_t>(v)] >= 0)
            children[static_cast<std::size_t>(d.parent[static_cast<std::size_t>(v)])].push_back(v);

    for (std::int32_t v = d.leaf_count; v < d.node_count(); ++v) {
        if (d.node_height(v) <= eta)
            continue; // inside a ball
        std::vector<std::int32_t> live;
        for (std::int32_t c : children[static_cast<std::size_t>(v)])
            if (rep[static_cast<std::size_t>(c)] >= 0)
                live.push_back(rep[static_cast<std::size_t>(c)]);
        if (static_cast<std::int32_t>(live.size()) < 2)
            throw std::logic_error("space_from_balls: malformed tree");
        std::int32_t id = out.node_count();
        out.parent.push_back(-1);
        out.height.push_back(d.node_height(v));
        for (std::int32_t c : live)
            out.parent[static_cast<std::size_t>(c)] = id;
        rep[static_cast<std::size_t>(v)] = id;
    }
    return out;
}

Dendrogram truncate_by_mass(const Dendrogram& d, std::int32_t max_leaves) {
    if (max_leaves < 1)
        throw std::invalid_argument("truncate_by_mass: max_leaves must be >= 1");
    if (d.mass.empty())
        throw std::invalid_argument("truncate_by_mass: leaf masses required");
    if (d.leaf_count <= max_leaves)
        return d;

    std::vector<std::int32_t> order(static_cast<std::size_t>(d.leaf_count));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
        double ma = d.mass[static_cast<std::size_t>(a)];
        double mb = d.mass[static_cast<std::size_t>(b)];
        if (ma != mb)
            return ma > mb;
        return a < b;
    });

    std::vector<char> keep(static_cast<std::size_t>(d.leaf_count), 0);
    keep[static_cast<std::size_t>(d.point)] = 1;
    std::int32_t taken = 1;
    for (std::int32_t i = 0; i < d.leaf_count && taken < max_leaves; ++i) {
        if (!keep[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]) {
            keep[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
            ++taken;
        }
    }

    std::vector<std::int32_t> old_to_new;
    Dendrogram out = induce_on_leaves(d, keep, old_to_new);
    out.point = old_to_new[static_cast<std::size_t>(d.point)];

    // Reassign each dropped leaf's mass to a nearest kept leaf: the smallest
    // indexed kept leaf under the lowest ancestor that has one.
    std::vector<std::vector<std::int32_t>> children(d.parent.size());
    for (std::int32_t v = 0; v < d.node_count(); ++v)
        if (d.parent[static_cast<std::size_t>(v)] >= 0)
            children[static_cast<std::size_t>(d.parent[static_cast<std::size_t>(v)])].push_back(v);
    // smallest kept leaf in each subtree, -1 when none
    std::vector<std::int32_t> kept_rep(d.parent.size(), -1);
    for (std::int32_t i = 0; i < d.leaf_count; ++i)
        if (keep[static_cast<std::size_t>(i)])
            kept_rep[static_cast<std::size_t>(i)] = i;
    for (std::int32_t v = d.leaf_count; v < d.node_count(); ++v) {
        std::int32_t best = -1;
        for (std::int32_t c : children[static_cast<std::size_t>(v)]) {
            std::int32_t r = kept_rep[static_cast<std::size_t>(c)];
            if (r >= 0 && (best < 0 || r < best))
                best = r;
        }
        kept_rep[static_cast<std::size_t>(v)] = best;
    }
    for (std::int32_t i = 0; i < d.leaf_count; ++i) {
        if (keep[static_cast<std::size_t>(i)])
            continue;
        std::int32_t v = i;
        while (kept_rep[static_cast<std::size_t>(v)] < 0)
            v = d.parent[static_cast<std::size_t>(v)];
        std::int32_t target = old_to_new[static_cast<std::size_t>(kept_rep[static_cast<std::size_t>(v)])];
        out.mass[static_cast<std::size_t>(target)] += d.mass[static_cast<std::size_t>(i)];
    }
    return out;
}

Dendrogram dendrogram_from_linear_gaps(const std::vector<double>& gaps) {
    std::int32_t n_leaves = static_cast<std::int32_t>(gaps.size()) + 1;
    Dendrogram d;
    d.leaf_count = n_leaves;
    d.parent.assign(static_cast<std::size_t>(n_leaves), -1);
    d.point = 0;
    if (gaps.empty())
        return d;
    for (double g : gaps)
        if (!(g > 0.0) || !std::isfinite(g))
            throw std::invalid_argument("dendrogram_from_linear_gaps: gaps must be positive");

    std::vector<std::size_t> order(gaps.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return gaps[a] < gaps[b];
    });

    // cluster root tracking per leaf via union by id
    std::vector<std::int32_t> cluster(static_cast<std::size_t>(n_leaves));
    std::iota(cluster.begin(), cluster.end(), 0);
    auto find_root = [&](std::int32_t leaf) {
        std::int32_t v = cluster[static_cast<std::size_t>(leaf)];
        while (d.parent[static_cast<std::size_t>(v)] >= 0)
            v = d.parent[static_cast<std::size_t>(v)];
        cluster[static_cast<std::size_t>(leaf)] = v;
        return v;
    };

    for (std::size_t idx : order) {
        std::int32_t left = find_root(static_cast<std::int32_t>(idx));
        std::int32_t right = find_root(static_cast<std::int32_t>(idx) + 1);
        std::int32_t id = d.node_count();
        d.parent.push_back(-1);
        d.height.push_back(gaps[idx]);
        d.parent[static_cast<std::size_t>(left)] = id;
        d.parent[static_cast<std::size_t>(right)] = id;
    }
    return d;
}

std::string serialize_dendrogram(const Dendrogram& d) {
    std::ostringstream out;
    out << "dendrogram 1\n";
    out << "leaves " << d.leaf_count << "\n";
    out << "point " << d.point << "\n";
    for (std::int32_t i = 0; i < d.leaf_count; ++i) {
        out << "leaf "
            << (d.leaf_label.empty() ? static_cast<std::int64_t>(i)
                                     : d.leaf_label[static_cast<std::size_t>(i)]);
        if (!d.mass.empty())
            out << ' ' << format_double(d.mass[static_cast<std::size_t>(i)]);
        out << '\n';
    }
    std::vector<std::vector<std::int32_t>> children(d.parent.size());
    for (std::int32_t v = 0; v < d.node_count(); ++v)
        if (d.parent[static_cast<std::size_t>(v)] >= 0)
            children[static_cast<std::size_t>(d.parent[static_cast<std::size_t>(v)])].push_back(v);
    for (std::int32_t v = d.leaf_count; v < d.node_count(); ++v) {
        out << "merge " << format_double(d.node_height(v));
        for (std::int32_t c : children[static_cast<std::size_t>(v)])
            out << ' ' << c;
        out << '\n';
    }
    return out.str();
}

Dendrogram parse_dendrogram(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "dendrogram 1")
        throw std::runtime_error("bad dendrogram header");

    Dendrogram d;
    bool have_mass = false;
    std::int32_t leaves_seen = 0;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream row(line);
        std::string tag;
        row >> tag;
        if (tag == "leaves") {
            row >> d.leaf_count;
            if (d.leaf_count < 1)
                throw std::runtime_error("bad leaf count");
            d.parent.assign(static_cast<std::size_t>(d.leaf_count), -1);
        } else if (tag == "point") {
            row >> d.point;
        } else if (tag == "leaf") {
            std::string label_field, mass_field;
            row >> label_field;
            d.leaf_label.push_back(static_cast<std::int64_t>(std::stoll(label_field)));
            if (row >> mass_field) {
                have_mass = true;
                d.mass.push_back(parse_double(mass_field));
            }
            ++leaves_seen;
        } else if (tag == "merge") {
            std::string h_field;
            row >> h_field;
            std::int32_t id = d.node_count();
            d.parent.push_back(-1);
            d.height.push_back(parse_double(h_field));
            std::int32_t c;
            int n_children = 0;
            while (row >> c) {
                if (c < 0 || c >= id)
                    throw std::runtime_error("merge references a later node");
                if (d.parent[static_cast<std::size_t>(c)] != -1)
                    throw std::runtime_error("node merged twice");
                d.parent[static_cast<std::size_t>(c)] = id;
                ++n_children;
            }
            if (n_children < 2)
                throw std::runtime_error("merge needs at least two children");
        } else {
            throw std::runtime_error("unknown dendrogram line: " + line);
        }
    }
    if (leaves_seen != d.leaf_count)
        throw std::runtime_error("leaf line count mismatch");
    if (have_mass && d.mass.size() != static_cast<std::size_t>(d.leaf_count))
        throw std::runtime_error("masses must appear on every leaf or none");
    d.validate();
    return d;
}

void write_dendrogram(const Dendrogram& d, const std::string& file) {
    std::ofstream out(file);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + file);
    out << serialize_dendrogram(d);
    if (!out)
        throw std::runtime_error("write failed: " + file);
}

Dendrogram read_dendrogram(const std::string& file) {
    std::ifstream in(file);
    if (!in)
        throw std::runtime_error("cannot open for reading: " + file);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dendrogram(buf.str());
}

} // namespace nearzero
