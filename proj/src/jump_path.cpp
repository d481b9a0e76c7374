#include "nearzero/jump_path.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nearzero {

namespace {

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace

double JumpPath::value_at(double t) const {
    if (times.empty())
        throw std::logic_error("JumpPath: empty path");
    if (t < times.front())
        throw std::invalid_argument("JumpPath: query before path start");
    // last index with times[idx] <= t
    auto it = std::upper_bound(times.begin(), times.end(), t);
    return values[static_cast<std::size_t>(it - times.begin()) - 1];
}

double JumpPath::final_value() const {
    if (values.empty())
        throw std::logic_error("JumpPath: empty path");
    return values.back();
}

std::size_t JumpPath::jump_count() const {
    return times.empty() ? 0 : times.size() - 1;
}

void write_jump_path_csv(const JumpPath& path, const std::string& file) {
    std::ofstream out(file);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + file);
    out << "t,value\n";
    for (std::size_t i = 0; i < path.times.size(); ++i)
        out << format_double(path.times[i]) << ',' << format_double(path.values[i]) << '\n';
    for (const auto& [k, v] : path.meta)
        out << "# " << k << "=" << v << '\n';
    if (!out)
        throw std::runtime_error("write failed: " + file);
}

JumpPath read_jump_path_csv(const std::string& file) {
    std::ifstream in(file);
    if (!in)
        throw std::runtime_error("cannot open for reading: " + file);
    JumpPath p;
    std::string line;
    if (!std::getline(in, line) || line != "t,value")
        throw std::runtime_error("bad jump path header in " + file);
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        if (line[0] == '#') {
            auto eq = line.find('=');
            if (eq != std::string::npos && line.size() > 2) {
                std::string key = line.substr(2, eq - 2);
                p.meta[key] = line.substr(eq + 1);
            }
            continue;
        }
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("bad jump path row in " + file);
        p.times.push_back(std::stod(line.substr(0, comma)));
        p.values.push_back(std::stod(line.substr(comma + 1)));
    }
    return p;
}

} // namespace nearzero
