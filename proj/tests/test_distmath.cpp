#include <gtest/gtest.h>

#include <cmath>
#include <tuple>

#include "slopesize/distmath.hpp"
#include "slopesize/error.hpp"
#include "support/oracles.hpp"

using namespace slopesize;

namespace {

DegreesOfFreedom df(std::int64_t v) { return DegreesOfFreedom(v); }

}  // namespace

TEST(StrongTypes, RejectBadValues) {
    EXPECT_THROW(DegreesOfFreedom{0}, DomainError);
    EXPECT_THROW(DegreesOfFreedom{-3}, DomainError);
    EXPECT_THROW(Noncentrality{std::nan("")}, DomainError);
    EXPECT_THROW(Noncentrality{INFINITY}, DomainError);
    EXPECT_EQ(DegreesOfFreedom(7).value(), 7);
    EXPECT_DOUBLE_EQ(Noncentrality(-1.5).delta(), -1.5);
}

TEST(NormalCdf, KnownValues) {
    EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
    EXPECT_NEAR(normal_cdf(1.96), 0.975002104851779563787, 1e-15);
    EXPECT_NEAR(normal_cdf(2.576), 0.995002467684264982605, 1e-15);
}

TEST(NormalCdf, AgreesWithSeriesOracle) {
    for (double x = -4.0; x <= 4.0; x += 0.173) {
        EXPECT_NEAR(normal_cdf(x), oracle::normal_cdf_series(x), 1e-14) << x;
    }
}

TEST(NormalCdf, FarTailsStayFinite) {
    EXPECT_GT(normal_cdf(-37.0), 0.0);
    EXPECT_EQ(normal_cdf(40.0), 1.0);
    EXPECT_NEAR(normal_cdf(-10.0), 7.6198530241605e-24, 1e-35);
}

TEST(NormalQuantile, InvertsCdf) {
    for (double p : {1e-300, 1e-12, 0.001, 0.025, 0.3, 0.5, 0.77, 0.975, 0.999999}) {
        const double x = normal_quantile(p);
        EXPECT_NEAR(normal_cdf(x), p, 1e-14 * std::max(1.0, p / 1e-2)) << p;
    }
    EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-13);
    EXPECT_THROW(normal_quantile(0.0), DomainError);
    EXPECT_THROW(normal_quantile(1.0), DomainError);
}

TEST(IncompleteBeta, EdgesAndSymmetry) {
    EXPECT_EQ(incomplete_beta(2.0, 3.0, 0.0), 0.0);
    EXPECT_EQ(incomplete_beta(2.0, 3.0, 1.0), 1.0);
    // I_x(1, 1) = x, I_x(a, 1) = x^a.
    EXPECT_NEAR(incomplete_beta(1.0, 1.0, 0.37), 0.37, 1e-15);
    EXPECT_NEAR(incomplete_beta(3.5, 1.0, 0.6), std::pow(0.6, 3.5), 1e-15);
    for (double x : {0.01, 0.2, 0.5, 0.8, 0.99}) {
        EXPECT_NEAR(incomplete_beta(2.5, 7.0, x) + incomplete_beta(7.0, 2.5, 1.0 - x), 1.0, 1e-14) << x;
    }
    EXPECT_THROW(incomplete_beta(0.0, 1.0, 0.5), DomainError);
    EXPECT_THROW(incomplete_beta(1.0, 1.0, 1.5), DomainError);
}

TEST(TCdf, KnownValues) {
    EXPECT_DOUBLE_EQ(t_cdf(0.0, df(7)), 0.5);
    EXPECT_NEAR(t_cdf(1.0, df(1)), 0.75, 1e-15);
    EXPECT_NEAR(t_cdf(2.0, df(10)), 0.9633059826146297, 1e-12);
}

TEST(TCdf, AgreesWithQuadrature) {
    for (std::int64_t nu : {1, 2, 3, 5, 12, 40, 200}) {
        for (double x : {-6.0, -2.2, -0.4, 0.1, 1.3, 3.7}) {
            EXPECT_NEAR(t_cdf(x, df(nu)), oracle::t_cdf_quadrature(x, static_cast<double>(nu)), 1e-10)
                << nu << " " << x;
        }
    }
}

TEST(TCdf, SymmetricAndMonotone) {
    double prev = 0.0;
    for (double x = -8.0; x <= 8.0; x += 0.25) {
        const double p = t_cdf(x, df(4));
        EXPECT_NEAR(p + t_cdf(-x, df(4)), 1.0, 1e-14);
        EXPECT_GE(p, prev);
        prev = p;
    }
}

TEST(TCdf, LargeDfApproachesNormal) {
    for (double x : {-2.5, -1.0, 0.3, 1.96}) {
        EXPECT_NEAR(t_cdf(x, df(1000000)), normal_cdf(x), 1e-4);
    }
}

TEST(TQuantile, KnownValues) {
    EXPECT_NEAR(t_quantile(0.5, df(9)), 0.0, 1e-14);
    EXPECT_NEAR(t_quantile(0.75, df(1)), 1.0, 1e-12);
    EXPECT_NEAR(t_quantile(0.975, df(30)), 2.0422724563012373, 1e-9);
}

TEST(TQuantile, MatchesBisectionOracle) {
    for (std::int64_t nu : {1, 3, 8, 28, 98}) {
        for (double p : {0.005, 0.05, 0.6, 0.95, 0.995}) {
            const double want =
                oracle::bisect([&](double x) { return oracle::t_cdf_quadrature(x, static_cast<double>(nu)) - p; },
                               -1000.0, 1000.0);
            EXPECT_NEAR(t_quantile(p, df(nu)), want, 1e-7 * std::max(1.0, std::fabs(want))) << nu << " " << p;
        }
    }
}

TEST(NoncentralT, ReducesToCentral) {
    EXPECT_DOUBLE_EQ(noncentral_t_cdf(0.0, df(12), Noncentrality(0.0)), 0.5);
    for (double x : {-3.0, -0.2, 1.5, 4.0}) {
        EXPECT_EQ(noncentral_t_cdf(x, df(5), Noncentrality(0.0)), t_cdf(x, df(5)));
    }
}

// scipy.stats.nct.cdf reference values.
class NoncentralTValues : public ::testing::TestWithParam<std::tuple<int, double, double, double>> {};

TEST_P(NoncentralTValues, MatchReference) {
    const auto [nu, ncp, x, want] = GetParam();
    EXPECT_NEAR(noncentral_t_cdf(x, df(nu), Noncentrality(ncp)), want, 1e-9);
}

INSTANTIATE_TEST_SUITE_P(Grid, NoncentralTValues,
                         ::testing::Values(std::make_tuple(5, 1.0, 1.5, 0.6496208042152254),
                                           std::make_tuple(10, 2.0, 2.0, 0.48097315281790715),
                                           std::make_tuple(20, 2.0, 2.0, 0.4902570541432667),
                                           std::make_tuple(30, -1.0, 0.5, 0.9322523603316912),
                                           std::make_tuple(8, 3.0, 4.0, 0.7308487235338177),
                                           std::make_tuple(50, 0.5, -0.5, 0.15955994641532883),
                                           std::make_tuple(3, 1.0, 2.5, 0.8241837592004869),
                                           std::make_tuple(15, 4.0, 3.0, 0.17804726400245643),
                                           std::make_tuple(100, 2.5, 1.8, 0.24231274114446047)));

TEST(NoncentralT, DecreasingInNcp) {
    double prev = 1.0;
    for (double d = -3.0; d <= 6.0; d += 0.5) {
        const double p = noncentral_t_cdf(1.2, df(9), Noncentrality(d));
        EXPECT_LT(p, prev) << d;
        prev = p;
    }
}

TEST(NoncentralT, ReflectionIdentity) {
    // F(x; nu, d) = 1 - F(-x; nu, -d).
    for (double x : {-1.0, 0.4, 2.2}) {
        const double a = noncentral_t_cdf(x, df(11), Noncentrality(1.7));
        const double b = noncentral_t_cdf(-x, df(11), Noncentrality(-1.7));
        EXPECT_NEAR(a + b, 1.0, 1e-12);
    }
}

TEST(NoncentralT, LargeNcpStillConverges) {
    const double p = noncentral_t_cdf(30.0, df(40), Noncentrality(30.0));
    EXPECT_GT(p, 0.3);
    EXPECT_LT(p, 0.6);
}

TEST(FixedDesignPower, NullGivesAlpha) {
    EXPECT_DOUBLE_EQ(fixed_design_power(0.0, 50.0, 2.0, 25, 0.05), 0.05);
    EXPECT_DOUBLE_EQ(fixed_design_power(0.0, 1.0, 1.0, 3, 0.01), 0.01);
}

TEST(FixedDesignPower, ReferenceValue) {
    EXPECT_NEAR(fixed_design_power(0.5, 100.0, 1.0, 30, 0.05), 0.9978974924947119, 1e-9);
}

TEST(FixedDesignPower, SymmetricAndIncreasing) {
    EXPECT_NEAR(fixed_design_power(0.2, 40.0, 1.0, 20, 0.1), fixed_design_power(-0.2, 40.0, 1.0, 20, 0.1), 1e-14);
    double prev = 0.0;
    for (double a = 0.0; a < 1.0; a += 0.05) {
        const double p = fixed_design_power(a, 40.0, 1.0, 20, 0.1);
        EXPECT_GE(p, prev);
        prev = p;
    }
    EXPECT_THROW(fixed_design_power(0.1, 0.0, 1.0, 20, 0.1), DomainError);
    EXPECT_THROW(fixed_design_power(0.1, 1.0, 0.0, 20, 0.1), DomainError);
    EXPECT_THROW(fixed_design_power(0.1, 1.0, 1.0, 2, 0.1), DomainError);
}
