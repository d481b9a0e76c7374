#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

namespace nearzero {

double log_gamma(double x);
double gamma_fn(double x);
double log_beta(double a, double b);
double beta_fn(double a, double b);
double log_binomial(std::int64_t n, std::int64_t k);

// CDF of the Gamma(shape 2, scale s) law: 1 - exp(-x/s) * (1 + x/s).
double gamma2_cdf(double x, double scale);
double exponential_cdf(double x, double mean);

// Regularized incomplete gamma functions, P + Q = 1.
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);
double chi_square_pvalue(double stat, int df);

struct QuadratureResult {
    double value;
    double abs_error; // estimate of the achieved absolute error
    int evaluations;
};

// Tanh-sinh quadrature over (a,b). Handles integrable endpoint singularities;
// the integrand is evaluated strictly inside the interval. Throws
// numeric_error carrying the achieved error estimate if the tolerance is not
// reached by max_level halvings.
QuadratureResult integrate_tanh_sinh(const std::function<double(double)>& f,
                                     double a, double b, double abs_tol,
                                     int max_level = 12);

// Adaptive Simpson over [a,b] for integrands that are finite at the
// endpoints. Same failure contract as integrate_tanh_sinh.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b, double abs_tol,
                                    int max_depth = 40);

// In-place radix-2 FFT; size must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse);

} // namespace nearzero
