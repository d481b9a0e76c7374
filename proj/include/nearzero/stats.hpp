#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace nearzero {

// Kolmogorov-Smirnov statistic of samples against a reference CDF.
double ks_one_sample(std::vector<double> samples,
                     const std::function<double(double)>& cdf);

// Two-sample KS statistic; handles ties across the two samples.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// First Wasserstein distance between two empirical laws on the line.
double wasserstein1(std::vector<double> a, std::vector<double> b);

// Total variation distance between two pmfs given on a shared index set.
double total_variation(const std::vector<double>& p, const std::vector<double>& q);

struct GofResult {
    double stat;
    int df;
    double p_value;
};

// Chi-square goodness of fit of integer counts against Poisson(mean). Bins
// with small expected counts are pooled until each expected count is at
// least min_expected; the mean is treated as known, so df = bins - 1.
GofResult poisson_gof(const std::vector<std::int64_t>& counts, double mean,
                      double min_expected = 5.0);

double sample_mean(const std::vector<double>& xs);
double sample_variance(const std::vector<double>& xs);
double sample_median(std::vector<double> xs);

// Empirical pmf of positive integer samples over {1..max_value} plus an
// overflow bucket at index max_value (0-based), normalized by sample count.
std::vector<double> empirical_pmf(const std::vector<std::int64_t>& samples,
                                  std::int64_t max_value);

} // namespace nearzero
