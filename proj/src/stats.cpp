#include "nearzero/stats.hpp"

#include "nearzero/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nearzero {

double ks_one_sample(std::vector<double> samples,
                     const std::function<double(double)>& cdf) {
    if (samples.empty())
        throw std::invalid_argument("ks_one_sample: empty sample");
    std::sort(samples.begin(), samples.end());
    double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double c = cdf(samples[i]);
        d = std::max(d, std::abs(c - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - c));
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double na = static_cast<double>(a.size());
    double nb = static_cast<double>(b.size());
    std::size_t ia = 0, ib = 0;
    double d = 0.0;
    while (ia < a.size() && ib < b.size()) {
        double v = std::min(a[ia], b[ib]);
        while (ia < a.size() && a[ia] == v)
            ++ia;
        while (ib < b.size() && b[ib] == v)
            ++ib;
        d = std::max(d, std::abs(static_cast<double>(ia) / na -
                                 static_cast<double>(ib) / nb));
    }
    return d;
}

double wasserstein1(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("wasserstein1: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    // Integrate |F_a - F_b| over the merged grid.
    std::vector<double> grid;
    grid.reserve(a.size() + b.size());
    grid.insert(grid.end(), a.begin(), a.end());
    grid.insert(grid.end(), b.begin(), b.end());
    std::sort(grid.begin(), grid.end());
    double na = static_cast<double>(a.size());
    double nb = static_cast<double>(b.size());
    double total = 0.0;
    for (std::size_t g = 0; g + 1 < grid.size(); ++g) {
        double width = grid[g + 1] - grid[g];
        if (width <= 0.0)
            continue;
        double x = grid[g];
        double fa = static_cast<double>(std::upper_bound(a.begin(), a.end(), x) - a.begin()) / na;
        double fb = static_cast<double>(std::upper_bound(b.begin(), b.end(), x) - b.begin()) / nb;
        total += std::abs(fa - fb) * width;
    }
    return total;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size())
        throw std::invalid_argument("total_variation: size mismatch");
    if (p.empty())
        throw std::invalid_argument("total_variation: empty pmf");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

GofResult poisson_gof(const std::vector<std::int64_t>& counts, double mean,
                      double min_expected) {
    if (counts.empty())
        throw std::invalid_argument("poisson_gof: empty sample");
    if (!(mean > 0.0))
        throw std::invalid_argument("poisson_gof: mean must be positive");

    std::int64_t max_k = 0;
    for (std::int64_t c : counts) {
        if (c < 0)
            throw std::invalid_argument("poisson_gof: counts must be nonnegative");
        max_k = std::max(max_k, c);
    }
    double n = static_cast<double>(counts.size());

    // Expected bin masses under Poisson(mean) for k = 0..max_k, plus the
    // upper tail folded into the last bin.
    std::vector<double> expected(static_cast<std::size_t>(max_k) + 1, 0.0);
    double pmf = std::exp(-mean);
    double cum = 0.0;
    for (std::int64_t k = 0; k <= max_k; ++k) {
        if (k > 0)
            pmf *= mean / static_cast<double>(k);
        expected[static_cast<std::size_t>(k)] = n * pmf;
        cum += pmf;
    }
    expected.back() += n * std::max(0.0, 1.0 - cum);

    std::vector<double> observed(static_cast<std::size_t>(max_k) + 1, 0.0);
    for (std::int64_t c : counts)
        observed[static_cast<std::size_t>(c)] += 1.0;

    // Pool adjacent bins from the right, then from the left, until every
    // remaining bin has a large enough expected count.
    std::vector<double> obs_pooled, exp_pooled;
    double acc_o = 0.0, acc_e = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        acc_o += observed[i];
        acc_e += expected[i];
        if (acc_e >= min_expected) {
            obs_pooled.push_back(acc_o);
            exp_pooled.push_back(acc_e);
            acc_o = acc_e = 0.0;
        }
    }
    if (acc_e > 0.0) {
        if (exp_pooled.empty()) {
            obs_pooled.push_back(acc_o);
            exp_pooled.push_back(acc_e);
        } else {
            obs_pooled.back() += acc_o;
            exp_pooled.back() += acc_e;
        }
    }
    if (exp_pooled.size() < 2)
        throw std::invalid_argument("poisson_gof: not enough distinct bins after pooling");

    double stat = 0.0;
    for (std::size_t i = 0; i < exp_pooled.size(); ++i) {
        double d = obs_pooled[i] - exp_pooled[i];
        stat += d * d / exp_pooled[i];
    }
    int df = static_cast<int>(exp_pooled.size()) - 1;
    return {stat, df, chi_square_pvalue(stat, df)};
}

double sample_mean(const std::vector<double>& xs) {
    if (xs.empty())
        throw std::invalid_argument("sample_mean: empty sample");
    double s = 0.0;
    for (double x : xs)
        s += x;
    return s / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs) {
    if (xs.size() < 2)
        throw std::invalid_argument("sample_variance: need at least two samples");
    double m = sample_mean(xs);
    double s = 0.0;
    for (double x : xs)
        s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

double sample_median(std::vector<double> xs) {
    if (xs.empty())
        throw std::invalid_argument("sample_median: empty sample");
    std::sort(xs.begin(), xs.end());
    std::size_t n = xs.size();
    if (n % 2 == 1)
        return xs[n / 2];
    return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

std::vector<double> empirical_pmf(const std::vector<std::int64_t>& samples,
                                  std::int64_t max_value) {
    if (samples.empty())
        throw std::invalid_argument("empirical_pmf: empty sample");
    if (max_value < 1)
        throw std::invalid_argument("empirical_pmf: max_value must be >= 1");
    std::vector<double> pmf(static_cast<std::size_t>(max_value) + 1, 0.0);
    for (std::int64_t s : samples) {
        if (s < 1)
            throw std::invalid_argument("empirical_pmf: samples must be >= 1");
        std::size_t idx = s > max_value ? static_cast<std::size_t>(max_value)
                                        : static_cast<std::size_t>(s - 1);
        pmf[idx] += 1.0;
    }
    for (double& v : pmf)
        v /= static_cast<double>(samples.size());
    return pmf;
}

} // namespace nearzero
