#pragma once

#include <cstdint>
#include <vector>

#include "nearzero/dendrogram.hpp"
#include "nearzero/jump_path.hpp"
#include "nearzero/rng.hpp"

namespace nearzero {

// Weight g(j) = Gamma(j+1-alpha) / Gamma(j+2) of a size-j jump of the
// limiting block-count chain, alpha in (1,2]. At alpha = 2 the weights
// degenerate to a unit atom at j = 1.
double spine_g(double alpha, std::int64_t j);
// G = sum_j g(j) = Gamma(2-alpha) / alpha
double spine_g_total(double alpha);
// G1 = sum_j j g(j) = Gamma(2-alpha) / (alpha (alpha-1))
double spine_g_first_moment(double alpha);

// Tail probabilities of the two normalized jump laws, in closed form:
// line law p_j = g(j)/G, immigration law q_j = j g(j)/G1.
double offspring_tail(double alpha, std::int64_t from);
double immigrant_tail(double alpha, std::int64_t from);

// Tabulated jump law: pmf[j-1] is the mass of a size-j jump, j = 1..k_trunc,
// tail_mass the closed-form remainder, normalizer the constant (G or G1)
// dividing the raw weights. pmf entries sum to 1 - tail_mass.
struct OffspringDist {
    double alpha = 2.0;
    std::vector<double> pmf;
    double tail_mass = 0.0;
    double normalizer = 1.0;
};

// Truncated tables of the two laws. Throws when the closed-form tail at
// k_trunc still exceeds tail_tol, quoting a size that would do; note the
// immigration tail decays like k^(1-alpha), so tight tolerances demand
// enormous tables for alpha near 1 and callers should loosen tail_tol there.
OffspringDist offspring_pmf(double alpha, std::int64_t k_trunc, double tail_tol = 1e-9);
OffspringDist immigrant_pmf(double alpha, std::int64_t k_trunc, double tail_tol = 1e-9);

// Limiting block-count chain on states 1,2,...: from state i at time
// r in [0,1) it jumps to i+j at rate c (i+j) g(j) / (1-r), with
// c = a_lambda Gamma(2-alpha) / alpha (c = 1 at alpha = 2). Jump sizes are
// drawn from the exact mixture i/(i + G1/G) line law + rest immigration law,
// with alias tables below table_size and closed-form tail inversion above.
class ZSimulator {
  public:
    ZSimulator(double alpha, double a_lambda, std::int64_t table_size = 4096);

    double alpha() const { return alpha_; }
    double rate_constant() const { return c_; }
    // Total jump rate out of state i, without the 1/(1-r) time factor.
    double exit_rate(std::int64_t i) const;
    double jump_rate(std::int64_t i, std::int64_t j, double r) const;
    std::int64_t sample_jump(std::int64_t i, RngStream& rng) const;

    // Path from Z(0) = 1 up to time r_max < 1. Jump counts have infinite
    // expectation as r_max approaches 1 when alpha < 2, hence the budget.
    JumpPath simulate(double r_max, RngStream& rng,
                      std::int64_t max_jumps = 1000000) const;

    // Z(r) truncated at cap: the walk stops early once it reaches or passes
    // cap, which cannot change the value on {1..cap-1} since paths only move
    // up. Exact and O(cap) even where full paths would not terminate.
    std::int64_t marginal_absorbed(double r, std::int64_t cap, RngStream& rng) const;

  private:
    std::int64_t tail_sample(bool immigrant, RngStream& rng) const;

    double alpha_ = 2.0;
    double c_ = 1.0;
    double g_total_ = 1.0;
    double g_first_ = 1.0;
    std::int64_t table_size_ = 0;
    AliasTable line_table_, imm_table_;
    double line_tail_ = 0.0, imm_tail_ = 0.0;
};

JumpPath simulate_Z(double alpha, double a_lambda, double r_max, RngStream& rng,
                    std::int64_t max_jumps = 1000000);
// Same law by an independent route (thinning of a homogeneous proposal);
// kept as a cross-check of the inverse-cdf waiting times.
JumpPath simulate_Z_thinning(double alpha, double a_lambda, double r_max,
                             RngStream& rng, std::int64_t max_jumps = 1000000);

// Distribution of Z(r) on {1..m_trunc} by uniformization of the chain under
// the clock s = -log(1-r). pmf[k-1] = P(Z(r) = k); leak is the mass that
// left the truncation window (true mass above m_trunc plus rounding). The
// pmf is never renormalized. Throws numeric_error when leak exceeds
// leak_tol; heavy-tailed cases (alpha < 2) need a generous tolerance since
// P(Z(r) > m) decays only like m^(1-alpha).
struct MarginalZ {
    std::vector<double> pmf;
    double leak = 0.0;
};
MarginalZ marginal_Z_oracle(double alpha, double a_lambda, double r,
                            std::int64_t m_trunc, double leak_tol = 0.05);

// Birth log of the limit genealogy on [0, 1-eta]: each jump of the path at
// time r adds `count` blocks beside a uniformly chosen live block.
struct LimitTree {
    struct Birth {
        double r = 0.0;
        std::int64_t parent = 0; // index among blocks alive before the birth
        std::int64_t count = 0;
    };
    double eta = 0.0;
    std::int64_t initial = 1; // blocks alive at r = 0
    std::vector<Birth> births;

    std::int64_t particles() const; // initial plus all birth counts
};

LimitTree limit_tree_events(const JumpPath& z, double eta, RngStream& rng);

// Ultrametric tree of a birth log: blocks born at time r sit at distance
// 1-r from their parent's subtree. Leaves are the blocks alive at 1-eta
// with uniform masses; the distinguished leaf is the initial block.
Dendrogram dendrogram_from_limit_tree(const LimitTree& t);

inline Dendrogram build_limit_tree(const JumpPath& z, double eta, RngStream& rng) {
    return dendrogram_from_limit_tree(limit_tree_events(z, eta, rng));
}

// Pair-merger weight process under Kingman scaling: starts at t0 > 0 from
// Gamma(2, 2 t0), jumps at rate 2/t, each jump adds Exp(mean 2 t). The
// marginal at any t is Gamma(2, 2 t).
JumpPath simulate_X(double t0, double t1, RngStream& rng,
                    std::int64_t max_jumps = 1000000);
double x_marginal_cdf(double t, double x);

} // namespace nearzero
