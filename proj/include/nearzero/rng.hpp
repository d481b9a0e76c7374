#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace nearzero {

// Counter-based generator (Philox4x32-10). Streams are keyed by
// (seed, module tag, replica index), so parallel replicas get independent
// streams that can never overlap no matter how much each one consumes, and
// results do not depend on how replicas are assigned to threads.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view tag, std::uint64_t replica = 0);

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    // Uniform on the open interval (0,1); never returns 0 or 1, so it is safe
    // to pass through log().
    double uniform();
    // Uniform on (-1,1).
    double uniform_signed();
    // Unbiased integer in [0, n), n >= 1.
    std::uint64_t uniform_below(std::uint64_t n);

    double exponential(double rate = 1.0);
    // Standard normal via a 128-layer ziggurat.
    double normal();
    // Exact Poisson sample, valid for any mean >= 0 (splits large means).
    std::int64_t poisson(double mean);

private:
    void refill();

    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> buf_;
    int buf_pos_;
};

// Raw Philox4x32-10 block function, exposed for the known-answer tests.
std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        const std::array<std::uint32_t, 2>& key);

// Walker alias table for repeated draws from a fixed finite distribution.
class AliasTable {
public:
    AliasTable() = default;
    explicit AliasTable(const std::vector<double>& weights);

    // Index in [0, size()) with probability proportional to weights[i].
    std::size_t sample(RngStream& rng) const;
    std::size_t size() const { return prob_.size(); }

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

} // namespace nearzero
