#pragma once

// Unconditional null law of the slope statistic when the predictor is
// itself normal, plus the closed-form density and moments of the slope
// estimator.
//
//   T^2 ~ (n-2)/(n-1) * W1 W4 / (W2 W3),
//   W1 ~ chi2(1), W2 ~ chi2(n-1), W3 ~ chi2(n-2), W4 ~ chi2(n-1), independent.

#include <cstdint>

#include "slopesize/stochastics.hpp"

namespace slopesize {

// Y | X ~ N(beta0 + beta1 X, sigma_eps^2),  X ~ N(mu_x, sigma_x^2).
struct ModelParams {
    double beta0 = 0.0;
    double beta1 = 0.0;
    double mu_x = 0.0;
    double sigma_x = 1.0;
    double sigma_eps = 1.0;

    void validate() const;
};

// lambda = beta1 * sigma_x / sigma_eps. The non-null law of T depends on
// the model only through this number.
class EffectSize {
public:
    explicit EffectSize(double lambda);
    static EffectSize from(const ModelParams& params);
    double value() const { return lambda_; }

private:
    double lambda_;
};

struct SlopeMoments {
    double mean;
    double variance;
};

// One draw of the null T^2. Consumes W1, W2, W3, W4 from `stream` in that order.
double sample_t2_null(Stream& stream, std::int64_t n);
double sample_t2_null(const StreamKey& key, std::int64_t n);

// Marginal density of the slope estimator with X random:
//   sigma_x / (B(1/2, (n-1)/2) sigma) * (1 + (b - beta1)^2 sigma_x^2 / sigma^2)^(-n/2).
double beta1hat_density(double b, std::int64_t n, const ModelParams& params);

// Density of U = (b - beta1) sigma_x / sigma.
double scaled_slope_density(double u, std::int64_t n);

// Mean beta1, variance sigma^2 / (sigma_x^2 (n - 3)); UndefinedMoment for n <= 3.
SlopeMoments beta1hat_moments(std::int64_t n, const ModelParams& params);

// (sigma_x / sigma) (b - beta1) sqrt(n - 1), which is t with n - 1 df.
double scaled_t_transform(double beta1hat, std::int64_t n, const ModelParams& params);

// E(T^2) = (n - 2) / ((n - 3)(n - 4)); UndefinedMoment for n <= 4.
double expected_t2(std::int64_t n);

}  // namespace slopesize
