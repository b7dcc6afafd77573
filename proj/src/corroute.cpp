#include "slopesize/corroute.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slopesize/distmath.hpp"
#include "slopesize/error.hpp"

namespace slopesize {

namespace {

void require_probability(double p, const char* what) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError(std::string(what) + " must lie in (0, 1), got " + std::to_string(p));
    }
}

}  // namespace

double lambda_to_rho(EffectSize lambda) {
    const double l = lambda.value();
    return l / std::hypot(1.0, l);
}

EffectSize rho_to_lambda(double rho) {
    if (!(std::fabs(rho) < 1.0)) throw DomainError("|rho| must be < 1");
    return EffectSize(rho / std::sqrt((1.0 - rho) * (1.0 + rho)));
}

double corr_power_approx(std::int64_t n, double rho, double alpha) {
    if (n < 4) throw DomainError("correlation power needs n >= 4, got " + std::to_string(n));
    if (!(std::fabs(rho) < 1.0)) throw DomainError("|rho| must be < 1");
    require_probability(alpha, "alpha");
    const auto nd = static_cast<double>(n);
    const double t = t_quantile(1.0 - 0.5 * alpha, DegreesOfFreedom(n - 2));
    const double r_crit = std::sqrt(t * t / (t * t + nd - 2.0));
    const double z_r = std::atanh(rho) + rho / (2.0 * (nd - 1.0));
    const double z_crit = std::atanh(r_crit);
    const double scale = std::sqrt(nd - 3.0);
    return normal_cdf((z_r - z_crit) * scale) + normal_cdf((-z_r - z_crit) * scale);
}

PowerEstimate corr_power_mc(std::int64_t n, double rho, double alpha, const SimPlan& plan) {
    if (n < 4) throw DomainError("correlation power needs n >= 4, got " + std::to_string(n));
    if (!(std::fabs(rho) < 1.0)) throw DomainError("|rho| must be < 1");
    require_probability(alpha, "alpha");
    plan.validate();

    // Y = rho X + sqrt(1 - rho^2) Z is the regression model with beta1 = rho,
    // sigma_eps = sqrt(1 - rho^2).
    ModelParams params;
    params.beta1 = rho;
    params.sigma_eps = std::sqrt((1.0 - rho) * (1.0 + rho));
    const double crit = t_quantile(1.0 - 0.5 * alpha, DegreesOfFreedom(n - 2));
    std::int64_t resampled = 0;
    const auto t1 = simulate_statistic(n, params, Statistic::t_corr, plan.power_trials,
                                       {plan.master_seed, 0, streams::kCorrelationPower}, plan.workers,
                                       &resampled);
    const auto hits = std::count_if(t1.begin(), t1.end(), [&](double v) { return std::fabs(v) > crit; });

    PowerEstimate est;
    est.n = n;
    est.alpha = alpha;
    est.lambda = rho_to_lambda(rho).value();
    est.trials = plan.power_trials;
    est.power = static_cast<double>(hits) / static_cast<double>(plan.power_trials);
    est.sd = std::sqrt(est.power * (1.0 - est.power) / static_cast<double>(plan.power_trials));
    est.resampled = resampled;
    return est;
}

SampleSizeResult find_sample_size_corr(double rho, double alpha, double target, std::int64_t n_ceiling) {
    if (!(std::fabs(rho) > 0.0 && std::fabs(rho) < 1.0)) throw DomainError("need 0 < |rho| < 1");
    require_probability(alpha, "alpha");
    require_probability(target, "target power");
    constexpr std::int64_t kMinN = 5;
    if (n_ceiling < kMinN) throw DomainError("search ceiling must be >= 5");

    auto reaches = [&](std::int64_t n) { return corr_power_approx(n, rho, alpha) >= target; };
    std::int64_t lo = kMinN - 1;
    std::int64_t hi = kMinN;
    while (!reaches(hi)) {
        if (hi >= n_ceiling) {
            throw SearchFailure("target power not reached below the n ceiling of " + std::to_string(n_ceiling));
        }
        lo = hi;
        hi = std::min(hi * 2, n_ceiling);
    }
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        (reaches(mid) ? hi : lo) = mid;
    }
    return {hi, target, corr_power_approx(hi, rho, alpha), 0.0, Route::correlation};
}

std::vector<ContrastRow> contrast_table(double alpha, std::span<const double> lambdas,
                                        std::span<const double> targets, const SimPlan& plan,
                                        const CriticalValueSource& critical, const SearchOptions& options) {
    std::vector<ContrastRow> rows;
    for (double lambda : lambdas) {
        const EffectSize es(lambda);
        const double rho = lambda_to_rho(es);
        for (double target : targets) {
            const auto slope = find_sample_size_slope(es, alpha, target, plan, critical, options);
            const auto corr = find_sample_size_corr(rho, alpha, target, options.n_ceiling);
            ContrastRow row;
            row.alpha = alpha;
            row.lambda = lambda;
            row.rho = rho;
            row.target_power = target;
            row.n_slope = slope.n;
            row.n_corr = corr.n;
            row.difference = slope.n - corr.n;
            row.slope_mean = slope.validated_mean;
            row.slope_sd = slope.validated_sd;
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<std::pair<double, double>> rho_lambda_curve(std::span<const double> lambda_grid) {
    std::vector<std::pair<double, double>> curve;
    curve.reserve(lambda_grid.size());
    for (double l : lambda_grid) curve.emplace_back(l, lambda_to_rho(EffectSize(l)));
    return curve;
}

}  // namespace slopesize
