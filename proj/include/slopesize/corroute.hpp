#pragma once

// The correlation route. With unit-variance X and error, rho and the effect
// size lambda are linked by rho = lambda / sqrt(1 + lambda^2), so a slope
// question can be answered by sizing the correlation t test
// T1 = sqrt(n-2) r / sqrt(1 - r^2) instead.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "slopesize/exactnull.hpp"
#include "slopesize/powersim.hpp"
#include "slopesize/stochastics.hpp"

namespace slopesize {

// 1 / sqrt(1 + 1/lambda^2), carrying the sign of lambda.
double lambda_to_rho(EffectSize lambda);

// rho / sqrt(1 - rho^2). Rejects |rho| >= 1.
EffectSize rho_to_lambda(double rho);

// Two-sided power of the correlation test from the bias-corrected Fisher z
// approximation:
//   t = t_{1-alpha/2, n-2},  r_c = sqrt(t^2 / (t^2 + n - 2)),
//   z_r = atanh(rho) + rho / (2(n-1)),  z_c = atanh(r_c),
//   power = Phi((z_r - z_c) sqrt(n-3)) + Phi((-z_r - z_c) sqrt(n-3)).
double corr_power_approx(std::int64_t n, double rho, double alpha);

// Monte Carlo power of |T1| > t_{1-alpha/2, n-2} over plan.power_trials
// bivariate normal samples X ~ N(0,1), Y = rho X + sqrt(1-rho^2) Z.
PowerEstimate corr_power_mc(std::int64_t n, double rho, double alpha, const SimPlan& plan);

// Smallest n >= 5 with corr_power_approx(n, rho, alpha) >= target.
SampleSizeResult find_sample_size_corr(double rho, double alpha, double target,
                                       std::int64_t n_ceiling = 1000000);

struct ContrastRow {
    double alpha = 0.0;
    double lambda = 0.0;
    double rho = 0.0;
    double target_power = 0.0;
    std::int64_t n_slope = 0;
    std::int64_t n_corr = 0;
    std::int64_t difference = 0;
    // Validation of n_slope, kept for reporting.
    double slope_mean = 0.0;
    double slope_sd = 0.0;
};

std::vector<ContrastRow> contrast_table(double alpha, std::span<const double> lambdas,
                                        std::span<const double> targets, const SimPlan& plan,
                                        const CriticalValueSource& critical,
                                        const SearchOptions& options = {});

std::vector<std::pair<double, double>> rho_lambda_curve(std::span<const double> lambda_grid);

}  // namespace slopesize
