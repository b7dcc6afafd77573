#pragma once

// Special functions and the distributions the slope and correlation tests
// need: standard normal, Student t, and noncentral t. Everything here is a
// pure function of its arguments.

#include <cstdint>

namespace slopesize {

// Integer degrees of freedom, always >= 1.
class DegreesOfFreedom {
public:
    explicit DegreesOfFreedom(std::int64_t value);
    std::int64_t value() const { return value_; }
    double as_double() const { return static_cast<double>(value_); }

private:
    std::int64_t value_;
};

// Shift parameter of the noncentral t. For the fixed-design slope test this
// is delta = A * sqrt(S_XX) / sigma; its square is the F-type noncentrality.
class Noncentrality {
public:
    explicit Noncentrality(double delta);
    double delta() const { return delta_; }

private:
    double delta_;
};

double normal_cdf(double x);

// Inverse of normal_cdf. Rejects p outside (0, 1).
double normal_quantile(double p);

// Regularized incomplete beta I_x(a, b). `one_minus_x` is passed separately
// so callers that know 1 - x more accurately than x can supply it.
double incomplete_beta(double a, double b, double x, double one_minus_x);
double incomplete_beta(double a, double b, double x);

double t_cdf(double x, DegreesOfFreedom df);
double t_quantile(double p, DegreesOfFreedom df);

// CDF of the noncentral t, summed as a Poisson-weighted series of
// incomplete beta terms starting at the Poisson mode and walking outward.
// Throws ConvergenceError if the term guard trips.
double noncentral_t_cdf(double x, DegreesOfFreedom df, Noncentrality ncp);

// Power of the two-sided conditional (fixed X) slope test at slope A.
// Rejection rule |T| > t_{1-alpha/2, n-2}; T is noncentral t with n - 2
// degrees of freedom and delta = A * sqrt(sxx) / sigma.
double fixed_design_power(double slope, double sxx, double sigma, std::int64_t n, double alpha);

}  // namespace slopesize
