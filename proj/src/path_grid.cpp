#include "nearzero/path_grid.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "nearzero/errors.hpp"

namespace nearzero {

namespace {

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void check_grid_args(double T, double dt) {
    if (!(dt > 0.0))
        throw std::invalid_argument("path grid: dt must be positive");
    if (!(T >= dt))
        throw std::invalid_argument("path grid: horizon shorter than one step");
}

} // namespace

PathGrid simulate_two_sided_bm(double T, double dt, RngStream& rng) {
    check_grid_args(T, dt);
    auto steps = static_cast<std::int64_t>(std::floor(T / dt));
    double sigma = std::sqrt(dt);

    PathGrid p;
    p.dt = dt;
    p.origin_index = steps;
    p.values.assign(static_cast<std::size_t>(2 * steps + 1), 0.0);
    // left side first so a fixed seed pins both branches independently of T
    double w = 0.0;
    for (std::int64_t k = 1; k <= steps; ++k) {
        w += sigma * rng.normal();
        p.values[static_cast<std::size_t>(steps - k)] = w;
    }
    w = 0.0;
    for (std::int64_t k = 1; k <= steps; ++k) {
        w += sigma * rng.normal();
        p.values[static_cast<std::size_t>(steps + k)] = w;
    }
    return p;
}

PathGrid straddling_excursion(const PathGrid& path, double level) {
    if (path.values.empty())
        throw std::invalid_argument("straddling_excursion: empty path");
    if (path.value_origin() <= level)
        throw std::invalid_argument("straddling_excursion: origin already at the level");
    std::int64_t lo = path.origin_index;
    while (lo > 0 && path.values[static_cast<std::size_t>(lo)] > level)
        --lo;
    std::int64_t hi = path.origin_index;
    while (hi + 1 < path.size() && path.values[static_cast<std::size_t>(hi)] > level)
        ++hi;
    if (path.values[static_cast<std::size_t>(lo)] > level ||
        path.values[static_cast<std::size_t>(hi)] > level)
        throw std::invalid_argument(
            "straddling_excursion: path does not cross the level on both sides");

    PathGrid out;
    out.dt = path.dt;
    out.origin_index = path.origin_index - lo;
    out.values.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t k = lo; k <= hi; ++k)
        out.values.push_back(path.values[static_cast<std::size_t>(k)] - level);
    return out;
}

PathGrid straddling_excursion_adaptive(double dt, RngStream& rng, double level,
                                       std::int64_t max_steps) {
    if (!(dt > 0.0))
        throw std::invalid_argument("straddling_excursion: dt must be positive");
    if (!(level < 0.0))
        throw std::invalid_argument("straddling_excursion: level must be below the origin");
    double sigma = std::sqrt(dt);
    // one independent branch per side; the left branch is a Brownian motion
    // by time reversal
    std::vector<double> side[2];
    for (int s = 0; s < 2; ++s) {
        double w = 0.0;
        while (w > level) {
            if (static_cast<std::int64_t>(side[s].size()) >= max_steps)
                throw resource_error(
                    "straddling_excursion: no level crossing within the step budget");
            w += sigma * rng.normal();
            side[s].push_back(w);
        }
    }
    PathGrid out;
    out.dt = dt;
    out.origin_index = static_cast<std::int64_t>(side[0].size());
    out.values.reserve(side[0].size() + side[1].size() + 1);
    for (auto it = side[0].rbegin(); it != side[0].rend(); ++it)
        out.values.push_back(*it - level);
    out.values.push_back(-level);
    for (double v : side[1])
        out.values.push_back(v - level);
    return out;
}

PathGrid refine_bridge(const PathGrid& path, RngStream& rng) {
    if (path.values.size() < 2)
        throw std::invalid_argument("refine_bridge: need at least two samples");
    PathGrid out;
    out.dt = path.dt / 2.0;
    out.origin_index = 2 * path.origin_index;
    out.values.reserve(2 * path.values.size() - 1);
    double half_sd = std::sqrt(path.dt) / 2.0;
    for (std::size_t k = 0; k + 1 < path.values.size(); ++k) {
        out.values.push_back(path.values[k]);
        out.values.push_back(0.5 * (path.values[k] + path.values[k + 1]) +
                             half_sd * rng.normal());
    }
    out.values.push_back(path.values.back());
    return out;
}

void write_path(const PathGrid& path, const std::string& base, std::uint64_t seed) {
    std::ofstream csv(base + ".csv");
    if (!csv)
        throw std::runtime_error("write_path: cannot open " + base + ".csv");
    csv << "index,value\n";
    for (std::size_t k = 0; k < path.values.size(); ++k)
        csv << k << ',' << format_double(path.values[k]) << '\n';
    if (!csv.flush())
        throw std::runtime_error("write_path: short write to " + base + ".csv");

    nlohmann::json meta;
    meta["dt"] = path.dt;
    meta["origin_index"] = path.origin_index;
    meta["seed"] = seed;
    std::ofstream side(base + ".json");
    if (!side)
        throw std::runtime_error("write_path: cannot open " + base + ".json");
    side << meta.dump(2) << '\n';
}

PathGrid read_path(const std::string& base) {
    std::ifstream side(base + ".json");
    if (!side)
        throw std::runtime_error("read_path: cannot open " + base + ".json");
    nlohmann::json meta = nlohmann::json::parse(side);

    PathGrid p;
    p.dt = meta.at("dt").get<double>();
    p.origin_index = meta.at("origin_index").get<std::int64_t>();

    std::ifstream csv(base + ".csv");
    if (!csv)
        throw std::runtime_error("read_path: cannot open " + base + ".csv");
    std::string line;
    std::getline(csv, line); // header
    while (std::getline(csv, line)) {
        if (line.empty())
            continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("read_path: malformed row in " + base + ".csv");
        double v = 0.0;
        const char* first = line.data() + comma + 1;
        auto res = std::from_chars(first, line.data() + line.size(), v);
        if (res.ec != std::errc{})
            throw std::runtime_error("read_path: malformed value in " + base + ".csv");
        p.values.push_back(v);
    }
    return p;
}

} // namespace nearzero
