#include "nearzero/rng.hpp"

#include <cmath>
#include <cstring>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace nearzero {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& x,
                         const std::array<std::uint32_t, 2>& k) {
    std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * x[0];
    std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * x[2];
    std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
}

std::uint64_t splitmix64_once(std::uint64_t state) {
    std::uint64_t z = state + 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// 128-layer ziggurat tables for the standard normal, built once.
struct ZigguratTables {
    double x[129];
    double f[129];

    ZigguratTables() {
        const double r = 3.442619855899;
        const double v = 9.91256303526217e-3;
        x[0] = v / std::exp(-0.5 * r * r); // virtual width of the base strip
        x[1] = r;
        for (int i = 2; i <= 127; ++i) {
            double y = v / x[i - 1] + std::exp(-0.5 * x[i - 1] * x[i - 1]);
            if (y >= 1.0)
                throw std::logic_error("ziggurat construction failed");
            x[i] = std::sqrt(-2.0 * std::log(y));
        }
        x[128] = 0.0;
        double closure = v / x[127] + std::exp(-0.5 * x[127] * x[127]);
        if (std::abs(closure - 1.0) > 1e-8)
            throw std::logic_error("ziggurat tables do not close");
        for (int i = 0; i <= 128; ++i)
            f[i] = std::exp(-0.5 * x[i] * x[i]);
        f[128] = 1.0;
    }
};

const ZigguratTables& ziggurat() {
    static const ZigguratTables tables;
    return tables;
}

} // namespace

std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        const std::array<std::uint32_t, 2>& key) {
    std::array<std::uint32_t, 4> x = counter;
    std::array<std::uint32_t, 2> k = key;
    for (int round = 0; round < 10; ++round) {
        if (round) {
            k[0] += kWeyl0;
            k[1] += kWeyl1;
        }
        philox_round(x, k);
    }
    return x;
}

RngStream::RngStream(std::uint64_t seed, std::string_view tag, std::uint64_t replica)
    : buf_pos_(4) {
    std::uint64_t key64 = splitmix64_once(splitmix64_once(seed) ^ fnv1a64(tag));
    key_ = {static_cast<std::uint32_t>(key64), static_cast<std::uint32_t>(key64 >> 32)};
    counter_ = {0, 0,
                static_cast<std::uint32_t>(replica),
                static_cast<std::uint32_t>(replica >> 32)};
}

void RngStream::refill() {
    buf_ = philox4x32(counter_, key_);
    buf_pos_ = 0;
    if (++counter_[0] == 0)
        ++counter_[1]; // c2/c3 stay reserved for the replica index
}

std::uint32_t RngStream::next_u32() {
    if (buf_pos_ >= 4)
        refill();
    return buf_[buf_pos_++];
}

std::uint64_t RngStream::next_u64() {
    std::uint64_t lo = next_u32();
    std::uint64_t hi = next_u32();
    return lo | (hi << 32);
}

double RngStream::uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::uniform_signed() {
    double u54 = static_cast<double>(next_u64() >> 10);
    return (u54 - (0x1.0p53 - 0.5)) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_below(std::uint64_t n) {
    if (n == 0)
        throw std::invalid_argument("uniform_below: n must be positive");
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
        std::uint64_t threshold = (0 - n) % n;
        while (lo < threshold) {
            m = static_cast<unsigned __int128>(next_u64()) * n;
            lo = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double RngStream::exponential(double rate) {
    if (!(rate > 0.0))
        throw std::invalid_argument("exponential: rate must be positive");
    return -std::log(uniform()) / rate;
}

double RngStream::normal() {
    const ZigguratTables& t = ziggurat();
    const double r = t.x[1];
    for (;;) {
        std::uint32_t layer_bits = next_u32();
        int i = static_cast<int>(layer_bits & 127u);
        double u = uniform_signed();
        double x = u * t.x[i];
        if (std::abs(x) < t.x[i + 1])
            return x;
        if (i == 0) {
            // Tail beyond r, Marsaglia's exact method.
            double xx, yy;
            do {
                xx = -std::log(uniform()) / r;
                yy = -std::log(uniform());
            } while (yy + yy < xx * xx);
            return u > 0 ? r + xx : -(r + xx);
        }
        double y = t.f[i] + uniform() * (t.f[i + 1] - t.f[i]);
        if (y < std::exp(-0.5 * x * x))
            return x;
    }
}

std::int64_t RngStream::poisson(double mean) {
    if (mean < 0.0 || !std::isfinite(mean))
        throw std::invalid_argument("poisson: mean must be finite and nonnegative");
    if (mean == 0.0)
        return 0;
    if (mean > 30.0) {
        // Exact split: a Poisson mean splits into two independent halves.
        double half = 0.5 * mean;
        return poisson(half) + poisson(mean - half);
    }
    double limit = std::exp(-mean);
    double p = 1.0;
    std::int64_t k = 0;
    do {
        ++k;
        p *= uniform();
    } while (p > limit);
    return k - 1;
}

AliasTable::AliasTable(const std::vector<double>& weights) {
    std::size_t n = weights.size();
    if (n == 0)
        throw std::invalid_argument("AliasTable: empty weight vector");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw std::invalid_argument("AliasTable: weights must be finite and nonnegative");
        total += w;
    }
    if (!(total > 0.0))
        throw std::invalid_argument("AliasTable: weights must not all be zero");

    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i)
        scaled[i] = weights[i] * static_cast<double>(n) / total;

    std::vector<std::uint32_t> small, large;
    small.reserve(n);
    large.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));

    while (!small.empty() && !large.empty()) {
        std::uint32_t s = small.back();
        small.pop_back();
        std::uint32_t l = large.back();
        large.pop_back();
        prob_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    while (!large.empty()) {
        prob_[large.back()] = 1.0;
        large.pop_back();
    }
    while (!small.empty()) {
        prob_[small.back()] = 1.0; // numerical leftovers
        small.pop_back();
    }
}

std::size_t AliasTable::sample(RngStream& rng) const {
    std::size_t i = static_cast<std::size_t>(rng.uniform_below(prob_.size()));
    return rng.uniform() < prob_[i] ? i : alias_[i];
}

} // namespace nearzero
