#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include "nearzero/dendrogram.hpp"
#include "nearzero/jump_path.hpp"
#include "nearzero/lambda_model.hpp"
#include "nearzero/rng.hpp"

namespace nearzero {

struct StopRule {
    // simulate up to this time; infinity means run until one block remains
    double horizon = std::numeric_limits<double>::infinity();

    static StopRule until_absorption() { return {}; }
    static StopRule until_time(double t);
};

struct MergerEvent {
    double time = 0.0;
    std::int32_t new_block = -1;        // id of the block created by this merger
    std::int32_t blocks_after = 0;      // block count right after the merger
    std::vector<std::int32_t> merged;   // ids of the blocks that merged
};

// Forest produced by one run. Block ids follow the dendrogram convention:
// 0..n-1 are the initial singletons, each merger appends the next id.
struct CoalescentHistory {
    std::int32_t n = 0;
    std::vector<MergerEvent> events;    // in increasing time order
    double final_time = 0.0;            // absorption time, or the horizon
    bool absorbed = false;              // one block left before the horizon

    std::vector<std::int32_t> parent;       // -1 while a block is unmerged
    std::vector<double> node_time;          // 0 for singletons, merger time otherwise
    std::vector<std::int32_t> subtree_leaves;
};

// Number of blocks at time t. Throws when t lies beyond the simulated
// horizon of an unabsorbed run.
std::int32_t block_count(const CoalescentHistory& h, double t);

// Fraction of individuals sharing a block with `label` at time t > 0.
double frequency_of(const CoalescentHistory& h, std::int32_t label, double t);

inline double frequency_of_one(const CoalescentHistory& h, double t) {
    return frequency_of(h, 0, t);
}

// Ancestor counts of one block along the reversed time change r = 1 - t/epsilon:
// value_at(r) is the number of blocks at coalescent time (1 - r) * epsilon that
// make up the block holding `label` at time epsilon. Starts at 1, nondecreasing,
// right continuous on [0, 1). The run must cover [0, epsilon]; when the block is
// already the whole sample the path is still valid and meta["whole_block"] is set.
JumpPath extract_Z(const CoalescentHistory& h, double epsilon, std::int32_t label = 0);

// Closed ball of `radius` around one individual, as a dendrogram whose
// heights are merger times. Leaf masses are 1/n, labels the individual ids.
// resolution > 0 quotients balls below that height; max_leaves > 0 truncates
// to the heaviest leaves afterwards.
Dendrogram evans_space(const CoalescentHistory& h, std::int32_t center, double radius,
                       double resolution = 0.0, std::int32_t max_leaves = 0);

// Samples merger sizes and runs the jump chain. warm(n) precomputes the
// total-rate ladder and the per-block-count size tables; call it before
// sharing one engine across threads, simulate() itself is const.
class CoalescentEngine {
  public:
    explicit CoalescentEngine(LambdaModel model);

    void warm(std::int32_t n);
    std::int32_t capacity() const;

    CoalescentHistory simulate(std::int32_t n, const StopRule& stop, RngStream& rng) const;

    // Merger size at b blocks; the mixture variant bypasses the cached
    // tables and is exposed so both samplers can be compared directly.
    std::int32_t merger_size(std::int32_t b, RngStream& rng) const;
    std::int32_t merger_size_mixture(std::int32_t b, RngStream& rng) const;

    const LambdaModel& model() const { return model_; }
    double total_merge_rate(std::int32_t b) const;

  private:
    LambdaModel model_;
    std::unique_ptr<TotalRateLadder> ladder_;
    std::vector<AliasTable> size_tables_; // index b - 2, Beta models only
    std::int32_t table_limit_ = 0;
};

CoalescentHistory simulate_coalescent(const LambdaModel& model, std::int32_t n,
                                      const StopRule& stop, std::uint64_t seed,
                                      std::uint64_t replica = 0);

} // namespace nearzero
