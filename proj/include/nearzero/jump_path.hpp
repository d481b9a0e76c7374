#pragma once

#include <map>
#include <string>
#include <vector>

namespace nearzero {

// Piecewise-constant cadlag path: values[i] holds from times[i] (inclusive)
// to times[i+1] (exclusive). Times are nondecreasing.
struct JumpPath {
    std::vector<double> times;
    std::vector<double> values;
    std::map<std::string, std::string> meta;

    // Value at time t; t must not precede the first recorded time.
    double value_at(double t) const;
    double final_value() const;
    std::size_t jump_count() const; // number of recorded jumps after the start
};

void write_jump_path_csv(const JumpPath& path, const std::string& file);
JumpPath read_jump_path_csv(const std::string& file);

} // namespace nearzero
