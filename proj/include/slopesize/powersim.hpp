#pragma once

// Power and sample size for the slope test with a random normal predictor.
//
// Power has no usable closed form here, so it is simulated: draw
// X ~ N(0, 1), Y | X ~ N(lambda X, 1), fit by least squares, and count
// |T| > C(n, alpha). The search for n uses common random numbers: trial i
// always draws from the same StreamKey, and the first n (x, y) pairs of a
// trial do not depend on n.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "slopesize/critvals.hpp"
#include "slopesize/exactnull.hpp"
#include "slopesize/stochastics.hpp"

namespace slopesize {

struct FitStats {
    double beta1_hat = 0.0;
    double sigma_hat = 0.0;
    double sigma_x_hat = 0.0;
    double t_slope = 0.0;
    double rho_hat = 0.0;
    double t_corr = 0.0;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    double rss = 0.0;
};

// Least-squares fit of ys on xs.
//   t_slope = beta1_hat * sigma_x_hat / sigma_hat,  sigma_hat^2 = RSS/(n-2),  sigma_x_hat^2 = S_XX/(n-1)
//   t_corr  = sqrt(n-2) rho_hat / sqrt(1 - rho_hat^2)
// Throws DegenerateX when S_XX = 0 and PerfectFit when RSS = 0.
FitStats fit_slope_stats(std::span<const double> xs, std::span<const double> ys);

struct PowerEstimate {
    std::int64_t n = 0;
    double alpha = 0.0;
    double lambda = 0.0;
    double power = 0.0;
    // Binomial standard error of `power`.
    double sd = 0.0;
    std::int64_t trials = 0;
    // Trials redrawn because the fit was degenerate.
    std::int64_t resampled = 0;
};

enum class Route { slope, correlation };

std::string to_string(Route route);

struct SampleSizeResult {
    std::int64_t n = 0;
    double target_power = 0.0;
    double validated_mean = 0.0;
    double validated_sd = 0.0;
    Route route = Route::slope;
};

// Trial i of a batch draws from StreamKey{master_seed, first_task + i, stream_id}.
struct TrialKeys {
    std::uint64_t master_seed = 0;
    std::uint64_t first_task = 0;
    std::uint32_t stream_id = streams::kUser;
};

// Simulates `trials` regressions of size n from `params` and returns the fit
// statistic picked by `statistic` for each one. Degenerate fits are redrawn
// from a fresh sub-key; the count of redraws goes to `resampled`.
enum class Statistic { t_slope, t_corr, beta1_hat };
std::vector<double> simulate_statistic(std::int64_t n, const ModelParams& params, Statistic statistic,
                                       std::int64_t trials, const TrialKeys& keys, unsigned workers,
                                       std::int64_t* resampled = nullptr);

// Power of |T| > c.value with sigma_x = sigma = 1, beta1 = lambda.
PowerEstimate simulate_power_slope(std::int64_t n, EffectSize lambda, double alpha,
                                   const CriticalValueEstimate& c, std::int64_t trials,
                                   const TrialKeys& keys, unsigned workers = 0);

// Same, for an arbitrary five-parameter model.
PowerEstimate simulate_power_slope(std::int64_t n, const ModelParams& params, double alpha,
                                   const CriticalValueEstimate& c, std::int64_t trials,
                                   const TrialKeys& keys, unsigned workers = 0);

struct PowerValidation {
    double mean = 0.0;
    double sd = 0.0;
};

// reps_outer independent power estimates of power_trials trials each.
PowerValidation validate_power_slope(std::int64_t n, EffectSize lambda, double alpha,
                                     const CriticalValueEstimate& c, const SimPlan& plan);

struct SearchOptions {
    std::int64_t n_ceiling = 1000000;
    // Accept n once power reaches target - slack.
    double slack = 0.005;
    // How far the validation step may move n away from the bisection answer.
    int max_adjust = 50;
};

// Doubling from n = 5 to bracket, bisection on n with search_trials CRN
// trials per probe, then a gallop and bisection on the validated mean (within
// max_adjust of the bisection answer) for the smallest n whose validated mean
// power reaches target - slack.
SampleSizeResult find_sample_size_slope(EffectSize lambda, double alpha, double target,
                                        const SimPlan& plan, const CriticalValueSource& critical,
                                        const SearchOptions& options = {});

struct PowerTableRow {
    double lambda = 0.0;
    double power = 0.0;
    std::int64_t n = 0;
    double mean = 0.0;
    double sd = 0.0;
};

std::vector<PowerTableRow> power_table(double alpha, std::span<const double> lambdas,
                                       std::span<const double> targets, const SimPlan& plan,
                                       const CriticalValueSource& critical,
                                       const SearchOptions& options = {});

}  // namespace slopesize
