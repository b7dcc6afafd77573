#include "slopesize/powersim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "slopesize/error.hpp"
#include "slopesize/parallel.hpp"

namespace slopesize {

namespace {

// Residual sums below this fraction of S_YY are treated as an exact fit.
constexpr double kPerfectFitRatio = 1e-24;
constexpr int kMaxResamples = 64;

void require_probability(double p, const char* what) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError(std::string(what) + " must lie in (0, 1), got " + std::to_string(p));
    }
}

StreamKey trial_key(const TrialKeys& keys, std::int64_t i, int attempt) {
    return {keys.master_seed, keys.first_task + static_cast<std::uint64_t>(i),
            keys.stream_id | (static_cast<std::uint32_t>(attempt) << streams::kResampleShift)};
}

// Draws n (x, y) pairs into the buffers. Pair j is always the (2j, 2j+1)-th
// normal of the stream, so a larger n extends a smaller one.
void draw_regression(Stream& stream, const ModelParams& params, std::vector<double>& xs,
                     std::vector<double>& ys) {
    for (std::size_t j = 0; j < xs.size(); ++j) {
        const double x = params.mu_x + params.sigma_x * stream.normal();
        xs[j] = x;
        ys[j] = params.beta0 + params.beta1 * x + params.sigma_eps * stream.normal();
    }
}

double pick(const FitStats& fit, Statistic statistic) {
    switch (statistic) {
        case Statistic::t_slope: return fit.t_slope;
        case Statistic::t_corr: return fit.t_corr;
        case Statistic::beta1_hat: return fit.beta1_hat;
    }
    return fit.t_slope;
}

ModelParams unit_model(EffectSize lambda) {
    ModelParams params;
    params.beta1 = lambda.value();
    return params;
}

}  // namespace

std::string to_string(Route route) { return route == Route::slope ? "slope" : "correlation"; }

FitStats fit_slope_stats(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw DomainError("xs and ys must have the same length");
    const std::size_t n = xs.size();
    if (n < 3) throw DomainError("a slope fit needs at least 3 points");
    const auto nd = static_cast<double>(n);

    const double x_bar = std::accumulate(xs.begin(), xs.end(), 0.0) / nd;
    const double y_bar = std::accumulate(ys.begin(), ys.end(), 0.0) / nd;
    FitStats fit;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - x_bar;
        const double dy = ys[i] - y_bar;
        fit.sxx += dx * dx;
        fit.sxy += dx * dy;
        fit.syy += dy * dy;
    }
    if (fit.sxx == 0.0) throw DegenerateX();
    fit.beta1_hat = fit.sxy / fit.sxx;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = (ys[i] - y_bar) - fit.beta1_hat * (xs[i] - x_bar);
        fit.rss += r * r;
    }
    if (!(fit.rss > kPerfectFitRatio * fit.syy) || fit.syy == 0.0) throw PerfectFit();

    fit.sigma_hat = std::sqrt(fit.rss / (nd - 2.0));
    fit.sigma_x_hat = std::sqrt(fit.sxx / (nd - 1.0));
    fit.t_slope = fit.beta1_hat * fit.sigma_x_hat / fit.sigma_hat;
    fit.rho_hat = std::clamp(fit.sxy / std::sqrt(fit.sxx * fit.syy), -1.0, 1.0);
    const double one_minus_r2 = (1.0 - fit.rho_hat) * (1.0 + fit.rho_hat);
    if (!(one_minus_r2 > 0.0)) throw PerfectFit();
    fit.t_corr = std::sqrt(nd - 2.0) * fit.rho_hat / std::sqrt(one_minus_r2);
    return fit;
}

std::vector<double> simulate_statistic(std::int64_t n, const ModelParams& params, Statistic statistic,
                                       std::int64_t trials, const TrialKeys& keys, unsigned workers,
                                       std::int64_t* resampled) {
    if (n < 3) throw DomainError("simulated regressions need n >= 3");
    if (trials < 1) throw DomainError("trials must be positive");
    params.validate();

    std::vector<double> out(static_cast<std::size_t>(trials));
    std::vector<std::int64_t> redraws(static_cast<std::size_t>(trials), 0);
    parallel_chunks(trials, workers, [&](std::int64_t begin, std::int64_t end) {
        std::vector<double> xs(static_cast<std::size_t>(n));
        std::vector<double> ys(static_cast<std::size_t>(n));
        for (std::int64_t i = begin; i < end; ++i) {
            for (int attempt = 0;; ++attempt) {
                if (attempt > kMaxResamples) {
                    throw NumericalError("simulated regression stayed degenerate after repeated redraws");
                }
                Stream stream(trial_key(keys, i, attempt));
                draw_regression(stream, params, xs, ys);
                try {
                    out[static_cast<std::size_t>(i)] = pick(fit_slope_stats(xs, ys), statistic);
                    redraws[static_cast<std::size_t>(i)] = attempt;
                    break;
                } catch (const DegenerateX&) {
                } catch (const PerfectFit&) {
                }
            }
        }
    });
    if (resampled) *resampled = std::accumulate(redraws.begin(), redraws.end(), std::int64_t{0});
    return out;
}

PowerEstimate simulate_power_slope(std::int64_t n, const ModelParams& params, double alpha,
                                   const CriticalValueEstimate& c, std::int64_t trials,
                                   const TrialKeys& keys, unsigned workers) {
    if (n < 5) throw DomainError("slope power needs n >= 5, got " + std::to_string(n));
    require_probability(alpha, "alpha");
    std::int64_t resampled = 0;
    const auto t = simulate_statistic(n, params, Statistic::t_slope, trials, keys, workers, &resampled);
    const auto rejections = std::count_if(t.begin(), t.end(), [&](double v) { return std::fabs(v) > c.value; });
    PowerEstimate est;
    est.n = n;
    est.alpha = alpha;
    est.lambda = EffectSize::from(params).value();
    est.trials = trials;
    est.power = static_cast<double>(rejections) / static_cast<double>(trials);
    est.sd = std::sqrt(est.power * (1.0 - est.power) / static_cast<double>(trials));
    est.resampled = resampled;
    return est;
}

PowerEstimate simulate_power_slope(std::int64_t n, EffectSize lambda, double alpha,
                                   const CriticalValueEstimate& c, std::int64_t trials,
                                   const TrialKeys& keys, unsigned workers) {
    return simulate_power_slope(n, unit_model(lambda), alpha, c, trials, keys, workers);
}

PowerValidation validate_power_slope(std::int64_t n, EffectSize lambda, double alpha,
                                     const CriticalValueEstimate& c, const SimPlan& plan) {
    if (n < 5) throw DomainError("slope power needs n >= 5, got " + std::to_string(n));
    require_probability(alpha, "alpha");
    plan.validate();
    const std::int64_t total = plan.reps_outer * plan.power_trials;
    const TrialKeys keys{plan.master_seed, 0, streams::kPowerValidation};
    const auto t = simulate_statistic(n, unit_model(lambda), Statistic::t_slope, total, keys, plan.workers);

    std::vector<double> powers(static_cast<std::size_t>(plan.reps_outer));
    for (std::int64_t r = 0; r < plan.reps_outer; ++r) {
        const auto first = t.begin() + r * plan.power_trials;
        const auto hits = std::count_if(first, first + plan.power_trials,
                                        [&](double v) { return std::fabs(v) > c.value; });
        powers[static_cast<std::size_t>(r)] = static_cast<double>(hits) / static_cast<double>(plan.power_trials);
    }
    PowerValidation v;
    v.mean = std::accumulate(powers.begin(), powers.end(), 0.0) / static_cast<double>(powers.size());
    if (powers.size() > 1) {
        double ss = 0.0;
        for (double p : powers) ss += (p - v.mean) * (p - v.mean);
        v.sd = std::sqrt(ss / static_cast<double>(powers.size() - 1));
    }
    return v;
}

SampleSizeResult find_sample_size_slope(EffectSize lambda, double alpha, double target,
                                        const SimPlan& plan, const CriticalValueSource& critical,
                                        const SearchOptions& options) {
    if (lambda.value() == 0.0) throw DomainError("effect size must be nonzero");
    require_probability(alpha, "alpha");
    require_probability(target, "target power");
    plan.validate();
    constexpr std::int64_t kMinN = 5;
    if (options.n_ceiling < kMinN) throw DomainError("search ceiling must be >= 5");

    const double threshold = target - options.slack;
    const TrialKeys search_keys{plan.master_seed, 0, streams::kPowerSearch};

    std::map<std::int64_t, double> probed;
    auto search_power = [&](std::int64_t n) {
        if (auto it = probed.find(n); it != probed.end()) return it->second;
        const auto c = critical(n, alpha);
        const double p = simulate_power_slope(n, lambda, alpha, c, plan.search_trials, search_keys, plan.workers).power;
        probed.emplace(n, p);
        return p;
    };

    // Bracket: lo fails (or is below the smallest legal n), hi passes.
    std::int64_t lo = kMinN - 1;
    std::int64_t hi = kMinN;
    while (search_power(hi) < threshold) {
        if (hi >= options.n_ceiling) {
            throw SearchFailure("target power not reached below the n ceiling of " +
                                std::to_string(options.n_ceiling));
        }
        lo = hi;
        hi = std::min(hi * 2, options.n_ceiling);
    }
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (search_power(mid) >= threshold) {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    std::map<std::int64_t, PowerValidation> validated;
    auto validate = [&](std::int64_t n) {
        if (auto it = validated.find(n); it != validated.end()) return it->second;
        const auto v = validate_power_slope(n, lambda, alpha, critical(n, alpha), plan);
        validated.emplace(n, v);
        return v;
    };

    // The validated mean uses its own fixed keys, so it is a deterministic
    // function of n. Gallop away from the bisection answer until it changes
    // sides of the threshold, then bisect between the last pass and fail.
    auto passes = [&](std::int64_t m) { return validate(m).mean >= threshold; };
    const std::int64_t reach = options.max_adjust;
    std::int64_t pass = hi;
    std::int64_t fail = hi;
    if (passes(hi)) {
        const std::int64_t floor = std::max(kMinN - 1, hi - reach);
        fail = floor;
        for (std::int64_t step = 1;; step *= 2) {
            const std::int64_t probe = std::max(floor, hi - step);
            if (probe == floor && (probe < kMinN || hi - probe >= reach)) {
                // At the boundary: below kMinN always fails; at the distance
                // bound a pass is kept as the answer.
                if (probe >= kMinN && passes(probe)) pass = fail = probe;
                break;
            }
            if (!passes(probe)) {
                fail = probe;
                break;
            }
            pass = probe;
        }
    } else {
        const std::int64_t top = std::min(hi + reach, options.n_ceiling);
        for (std::int64_t step = 1;; step *= 2) {
            const std::int64_t probe = std::min(top, hi + step);
            if (passes(probe)) {
                pass = probe;
                break;
            }
            fail = probe;
            if (probe == top) {
                throw SearchFailure("validated power stayed below target near n = " + std::to_string(hi));
            }
        }
    }
    while (pass - fail > 1) {
        const std::int64_t mid = fail + (pass - fail) / 2;
        (passes(mid) ? pass : fail) = mid;
    }
    const std::int64_t n = pass;

    const auto v = validate(n);
    return {n, target, v.mean, v.sd, Route::slope};
}

std::vector<PowerTableRow> power_table(double alpha, std::span<const double> lambdas,
                                       std::span<const double> targets, const SimPlan& plan,
                                       const CriticalValueSource& critical, const SearchOptions& options) {
    std::vector<PowerTableRow> rows;
    for (double lambda : lambdas) {
        for (double target : targets) {
            const auto result = find_sample_size_slope(EffectSize(lambda), alpha, target, plan, critical, options);
            rows.push_back({lambda, target, result.n, result.validated_mean, result.validated_sd});
        }
    }
    return rows;
}

}  // namespace slopesize
