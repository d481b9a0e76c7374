#pragma once

#include <cstdint>
#include <vector>

namespace nearzero {

enum class LambdaKind { KingmanAtom, Beta, TabulatedDensity };

// Finite measure on [0,1] driving the merger rates. Three shapes are
// supported:
//   KingmanAtom       unit atom at p = 0 (pairwise mergers only)
//   Beta              Beta(2-alpha, alpha) density with alpha in (1,2)
//   TabulatedDensity  density sampled on the uniform grid p_m = m/M for
//                     m = 1..M, linearly interpolated between nodes, with the
//                     declared head a_lambda * p^(1-alpha) on (0, 1/M)
struct LambdaModel {
    LambdaKind kind = LambdaKind::KingmanAtom;
    double alpha = 2.0;    // head exponent; 2 for the Kingman atom
    double a_lambda = 0.0; // head coefficient; Beta fills in 1/B(2-alpha, alpha)
    std::vector<double> density;
    double total_mass = 1.0;

    static LambdaModel kingman();
    static LambdaModel beta(double alpha);
    static LambdaModel tabulated(std::vector<double> density, double alpha,
                                 double a_lambda);

    // Supremum of the interpolated density over [1/M, 1] (tabulated only).
    double density_sup() const;
    // Density value at p in (0,1]: declared head below 1/M, interpolation
    // above (tabulated only).
    double density_at(double p) const;
    // Max relative deviation of the first grid nodes from the declared head;
    // a diagnostic for callers, never asserted internally.
    double head_deviation(int nodes = 4) const;
};

// lambda_{n,k}: merger rate integral for k marked blocks out of n.
double lambda_rate(std::int64_t n, std::int64_t k, const LambdaModel& model,
                   double abs_tol = 1e-10);

// gamma_{n,k} = C(n,k) * lambda_{n,k}, computed in log space.
double gamma_rate(std::int64_t n, std::int64_t k, const LambdaModel& model,
                  double abs_tol = 1e-10);

// Total merger rate from n blocks; 0 for n <= 1.
double total_rate(std::int64_t n, const LambdaModel& model);

// Speed constant alpha / Gamma(2-alpha) for the small-time block count law,
// defined for alpha strictly inside (1,2).
double cdi_constant(double alpha);

// Jump rate of the limiting block-counting chain at state i, jump j, time r.
double limit_jump_rate(std::int64_t i, std::int64_t j, double r,
                       const LambdaModel& model);

// Pair rate lambda_{b,2} for a given model; shared by total_rate and the
// simulation ladder.
double pair_lambda(std::int64_t b, const LambdaModel& model);

// Total merger rates R(b) for b = 2..n_max, built once per model via the
// recursion R(b+1) = R(b) + b * lambda_{b+1,2}.
class TotalRateLadder {
public:
    TotalRateLadder(const LambdaModel& model, std::int64_t n_max);

    double total(std::int64_t b) const;       // R(b), with R(0) = R(1) = 0
    double pair_rate(std::int64_t b) const;   // lambda_{b,2}
    std::int64_t capacity() const { return static_cast<std::int64_t>(total_.size()) - 1; }

private:
    std::vector<double> total_;
    std::vector<double> pair_;
};

} // namespace nearzero
