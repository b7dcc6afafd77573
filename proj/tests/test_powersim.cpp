#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "slopesize/distmath.hpp"
#include "slopesize/error.hpp"
#include "slopesize/powersim.hpp"
#include "support/oracles.hpp"

using namespace slopesize;

namespace {

constexpr std::uint32_t kTestRole = streams::kUser + 3;

ModelParams model(double beta0, double beta1, double mu_x, double sigma_x, double sigma_eps) {
    ModelParams p;
    p.beta0 = beta0;
    p.beta1 = beta1;
    p.mu_x = mu_x;
    p.sigma_x = sigma_x;
    p.sigma_eps = sigma_eps;
    return p;
}

double relative_gap(double a, double b) { return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)}); }

}  // namespace

TEST(Fit, SymmetricResponse) {
    const std::vector<double> xs{-1, 0, 1}, ys{1, 0, 1};
    const auto f = fit_slope_stats(xs, ys);
    EXPECT_EQ(f.beta1_hat, 0.0);
    EXPECT_EQ(f.t_slope, 0.0);
}

TEST(Fit, HandWorkedExample) {
    const std::vector<double> xs{0, 1, 2, 3}, ys{0, 1, 1, 2};
    const auto f = fit_slope_stats(xs, ys);
    EXPECT_NEAR(f.beta1_hat, 0.6, 1e-15);
    EXPECT_NEAR(f.rss, 0.2, 1e-15);
    EXPECT_NEAR(f.sigma_hat, 0.316228, 1e-6);
    EXPECT_NEAR(f.sigma_x_hat, 1.290994, 1e-6);
    EXPECT_NEAR(f.t_slope, 2.449490, 1e-6);
    EXPECT_NEAR(f.rho_hat, 0.948683, 1e-6);
    EXPECT_NEAR(f.t_corr, 4.242641, 1e-6);
    EXPECT_NEAR(f.t_corr, f.t_slope * std::sqrt(3.0), 1e-12);
}

TEST(Fit, Errors) {
    const std::vector<double> line{0, 1, 2};
    EXPECT_THROW(fit_slope_stats(line, line), PerfectFit);
    const std::vector<double> flat{2, 2, 2}, ys{1, 5, 3};
    EXPECT_THROW(fit_slope_stats(flat, ys), DegenerateX);
    const std::vector<double> constant_y{4, 4, 4};
    EXPECT_THROW(fit_slope_stats(ys, constant_y), PerfectFit);
    const std::vector<double> two{1, 2};
    EXPECT_THROW(fit_slope_stats(two, two), DomainError);
    EXPECT_THROW(fit_slope_stats(line, two), DomainError);
}

TEST(Fit, CorrelationIdentityOnRandomData) {
    Stream s({1, 0, kTestRole});
    for (int rep = 0; rep < 1000; ++rep) {
        const auto n = static_cast<std::size_t>(3 + rep % 18);
        std::vector<double> xs(n), ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = s.normal(0.0, 2.0);
            ys[i] = 0.3 * xs[i] + s.normal();
        }
        const auto f = fit_slope_stats(xs, ys);
        const double lhs = f.t_corr * f.t_corr;
        const double rhs = static_cast<double>(n - 1) * f.t_slope * f.t_slope;
        EXPECT_LE(relative_gap(lhs, rhs), 1e-10) << n;
    }
}

TEST(Fit, LocationShiftInvariance) {
    Stream s({2, 0, kTestRole});
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 4 + static_cast<std::size_t>(rep % 15);
        std::vector<double> xs(n), ys(n), xs2(n), ys2(n);
        const double a = s.normal(0.0, 10.0), b = s.normal(0.0, 10.0);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = s.normal();
            ys[i] = -0.8 * xs[i] + s.normal();
            xs2[i] = xs[i] + a;
            ys2[i] = ys[i] + b;
        }
        const auto f = fit_slope_stats(xs, ys);
        const auto g = fit_slope_stats(xs2, ys2);
        EXPECT_LE(relative_gap(f.beta1_hat, g.beta1_hat), 1e-10);
        EXPECT_LE(relative_gap(f.sigma_hat, g.sigma_hat), 1e-10);
        EXPECT_LE(relative_gap(f.sigma_x_hat, g.sigma_x_hat), 1e-10);
        EXPECT_LE(relative_gap(f.t_slope, g.t_slope), 1e-10);
        EXPECT_LE(relative_gap(f.rho_hat, g.rho_hat), 1e-10);
        EXPECT_LE(relative_gap(f.t_corr, g.t_corr), 1e-10);
    }
}

// Trial i is a pure function of its key: worker count and batch offset do
// not change what it draws.
TEST(Simulate, TrialsKeyedByIndex) {
    const TrialKeys keys{3, 0, kTestRole};
    const auto a = simulate_statistic(10, model(0, 0.5, 0, 1, 1), Statistic::t_slope, 50, keys, 1);
    const auto b = simulate_statistic(10, model(0, 0.5, 0, 1, 1), Statistic::t_slope, 50, keys, 3);
    EXPECT_EQ(a, b);
    const TrialKeys shifted{3, 10, kTestRole};
    const auto c = simulate_statistic(10, model(0, 0.5, 0, 1, 1), Statistic::t_slope, 40, shifted, 2);
    EXPECT_TRUE(std::equal(c.begin(), c.end(), a.begin() + 10));
}

TEST(Simulate, PowerAtNullIsLevel) {
    // The 95% point of |t(28)| / sqrt(29), the exact null law of the statistic.
    const double crit = t_quantile(0.975, DegreesOfFreedom(28)) / std::sqrt(29.0);
    const CriticalValueEstimate c{30, 0.05, crit, 0.0, CriticalValueMethod::exact_mc};
    const auto est = simulate_power_slope(30, EffectSize(0.0), 0.05, c, 20000, {4, 0, kTestRole});
    EXPECT_NEAR(est.power, 0.05, 3.0 * oracle::binomial_se(0.05, 20000));
    EXPECT_EQ(est.trials, 20000);
    EXPECT_NEAR(est.sd, oracle::binomial_se(est.power, 20000), 1e-15);
}

TEST(Simulate, SpotPowers) {
    const auto plan = SimPlan::paper_defaults(5);
    const auto c48 = critical_value_mc(48, 0.05, plan);
    const auto p48 = validate_power_slope(48, EffectSize(0.5), 0.05, c48, SimPlan::fast(5));
    EXPECT_NEAR(p48.mean, 0.9095, 0.02);
    const auto c100 = critical_value_mc(100, 0.10, plan);
    const auto p100 = validate_power_slope(100, EffectSize(0.3), 0.10, c100, SimPlan::fast(6));
    EXPECT_NEAR(p100.mean, 0.9006, 0.02);
}

TEST(Simulate, PowerDependsOnlyOnLambda) {
    const CriticalValueEstimate c{60, 0.05, 0.2656, 0.0, CriticalValueMethod::exact_mc};
    constexpr std::int64_t kTrials = 20000;
    const auto a = simulate_power_slope(60, model(0, 0.25, 0, 2, 1), 0.05, c, kTrials, {7, 0, kTestRole});
    const auto b = simulate_power_slope(60, model(0, 0.5, 0, 1, 1), 0.05, c, kTrials, {8, 0, kTestRole});
    EXPECT_DOUBLE_EQ(a.lambda, 0.5);
    EXPECT_NEAR(a.power, b.power, 3.0 * std::hypot(a.sd, b.sd));
}

TEST(Simulate, SignOfLambdaDoesNotMatter) {
    const CriticalValueEstimate c{40, 0.10, 0.26, 0.0, CriticalValueMethod::exact_mc};
    constexpr std::int64_t kTrials = 20000;
    const auto up = simulate_power_slope(40, EffectSize(0.3), 0.10, c, kTrials, {9, 0, kTestRole});
    const auto down = simulate_power_slope(40, EffectSize(-0.3), 0.10, c, kTrials, {10, 0, kTestRole});
    EXPECT_NEAR(up.power, down.power, 3.0 * std::hypot(up.sd, down.sd));
}

TEST(Simulate, Errors) {
    const CriticalValueEstimate c{30, 0.05, 0.4, 0.0, CriticalValueMethod::exact_mc};
    EXPECT_THROW(simulate_power_slope(4, EffectSize(0.5), 0.05, c, 10, {}), DomainError);
    EXPECT_THROW(simulate_power_slope(30, EffectSize(0.5), 0.0, c, 10, {}), DomainError);
    EXPECT_THROW(simulate_statistic(30, model(0, 0, 0, 1, 1), Statistic::t_slope, 0, {}, 1), DomainError);
    EXPECT_THROW(simulate_statistic(30, model(0, 0, 0, -1, 1), Statistic::t_slope, 5, {}, 1), DomainError);
}

TEST(Search, MediumEffectAtFivePercent) {
    const auto plan = SimPlan::fast(11);
    CriticalValueCache cache;
    const CriticalValueSource critical(CriticalValueMethod::exact_mc, plan, &cache);
    const auto r = find_sample_size_slope(EffectSize(0.3), 0.05, 0.80, plan, critical);
    EXPECT_NEAR(static_cast<double>(r.n), 91.0, 3.0);
    EXPECT_GE(r.validated_mean, 0.80 - 0.005);
    EXPECT_EQ(r.route, Route::slope);
}

TEST(Search, LargeEffectAtTenPercent) {
    const auto plan = SimPlan::fast(12);
    const CriticalValueSource critical(CriticalValueMethod::exact_mc, plan);
    const auto r = find_sample_size_slope(EffectSize(0.6), 0.10, 0.80, plan, critical);
    EXPECT_NEAR(static_cast<double>(r.n), 21.0, 2.0);
}

// The fast preset's 1,000 inner draws bias the 1% critical value low, which
// shifts n down by tens at this effect size; keep the full inner count here.
TEST(Search, SmallEffectAtOnePercent) {
    auto plan = SimPlan::fast(13);
    plan.reps_inner = 10000;
    plan.reps_outer = 20;
    plan.search_trials = 4000;
    const CriticalValueSource critical(CriticalValueMethod::exact_mc, plan);
    const auto r = find_sample_size_slope(EffectSize(0.1), 0.01, 0.90, plan, critical);
    EXPECT_NEAR(static_cast<double>(r.n), 1500.0, 40.0);
}

TEST(Search, ResultIsMinimalUnderValidation) {
    const auto plan = SimPlan::fast(14);
    const CriticalValueSource critical(CriticalValueMethod::exact_mc, plan);
    const auto r = find_sample_size_slope(EffectSize(0.5), 0.05, 0.90, plan, critical);
    const auto below = validate_power_slope(r.n - 1, EffectSize(0.5), 0.05, critical(r.n - 1, 0.05), plan);
    EXPECT_LT(below.mean, 0.90 - 0.005);
    EXPECT_GE(r.validated_mean, 0.90 - 0.005);
}

TEST(Search, Deterministic) {
    const auto plan = SimPlan::fast(15);
    const CriticalValueSource critical(CriticalValueMethod::normal_approx, plan);
    const auto a = find_sample_size_slope(EffectSize(0.4), 0.05, 0.8, plan, critical);
    const auto b = find_sample_size_slope(EffectSize(0.4), 0.05, 0.8, plan, critical);
    EXPECT_EQ(a.n, b.n);
    EXPECT_EQ(a.validated_mean, b.validated_mean);
}

TEST(Search, Errors) {
    const auto plan = SimPlan::fast(16);
    const CriticalValueSource critical(CriticalValueMethod::normal_approx, plan);
    EXPECT_THROW(find_sample_size_slope(EffectSize(0.0), 0.05, 0.8, plan, critical), DomainError);
    EXPECT_THROW(find_sample_size_slope(EffectSize(0.5), 0.05, 1.0, plan, critical), DomainError);
    SearchOptions tight;
    tight.n_ceiling = 20;
    EXPECT_THROW(find_sample_size_slope(EffectSize(0.1), 0.05, 0.9, plan, critical, tight), SearchFailure);
}

TEST(PowerTable, RowLayout) {
    const auto plan = SimPlan::fast(17);
    const CriticalValueSource critical(CriticalValueMethod::exact_mc, plan);
    const std::vector<double> lambdas{0.5}, targets{0.9};
    const auto rows = power_table(0.05, lambdas, targets, plan, critical);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].lambda, 0.5);
    EXPECT_EQ(rows[0].power, 0.9);
    EXPECT_NEAR(static_cast<double>(rows[0].n), 48.0, 2.0);
    EXPECT_NEAR(rows[0].mean, 0.9095, 0.02);
    EXPECT_NEAR(rows[0].sd, 0.009, 0.004);
}
