#include "slopesize/distmath.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "slopesize/error.hpp"

namespace slopesize {

namespace {

constexpr double kIbetaTol = 1e-15;
constexpr int kIbetaMaxIter = 10000;
constexpr double kTiny = 1e-300;

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// x^a (1-x)^b / B(a, b), computed in log space.
double ibeta_front(double a, double b, double x, double one_minus_x) {
    return std::exp(a * std::log(x) + b * std::log(one_minus_x) - log_beta(a, b));
}

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
// Converges fast for x < (a + 1) / (a + b + 2).
double ibeta_continued_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kIbetaMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kIbetaTol) return h;
    }
    throw ConvergenceError("incomplete beta continued fraction did not converge");
}

// I_x(a,b) = x^a / B(a,b) * sum_k (1-b)_k x^k / (k! (a+k)); short when x is small.
double ibeta_series(double a, double b, double x) {
    double term = 1.0;
    double sum = 1.0 / a;
    for (int k = 1; k <= kIbetaMaxIter; ++k) {
        term *= (k - b) * x / k;
        const double contrib = term / (a + k);
        sum += contrib;
        if (std::fabs(contrib) < kIbetaTol * std::fabs(sum)) {
            return std::exp(a * std::log(x) - log_beta(a, b)) * sum;
        }
    }
    throw ConvergenceError("incomplete beta series did not converge");
}

double ibeta_lower(double a, double b, double x, double one_minus_x) {
    // Short series region: x tiny relative to the CF switch point.
    if (x * (a + b) < 0.1 * (a + 1.0)) {
        return ibeta_series(a, b, x);
    }
    return ibeta_front(a, b, x, one_minus_x) * ibeta_continued_fraction(a, b, x) / a;
}

void require_probability_open(double p, const char* what) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError(std::string(what) + " must lie in (0, 1), got " + std::to_string(p));
    }
}

// Acklam's rational approximation; normal_quantile polishes it with Halley steps.
double normal_quantile_initial(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

DegreesOfFreedom::DegreesOfFreedom(std::int64_t value) : value_(value) {
    if (value < 1) {
        throw DomainError("degrees of freedom must be >= 1, got " + std::to_string(value));
    }
}

Noncentrality::Noncentrality(double delta) : delta_(delta) {
    if (!std::isfinite(delta)) throw DomainError("noncentrality must be finite");
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double p) {
    require_probability_open(p, "probability");
    double x = normal_quantile_initial(p);
    // Halley refinement against the erfc-based CDF.
    for (int i = 0; i < 2; ++i) {
        const double e = normal_cdf(x) - p;
        const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

double incomplete_beta(double a, double b, double x, double one_minus_x) {
    if (!(a > 0.0 && b > 0.0)) throw DomainError("incomplete beta needs a > 0 and b > 0");
    if (x < 0.0 || x > 1.0) throw DomainError("incomplete beta argument outside [0, 1]");
    if (x == 0.0) return 0.0;
    if (one_minus_x == 0.0) return 1.0;
    if (x < (a + 1.0) / (a + b + 2.0)) return ibeta_lower(a, b, x, one_minus_x);
    return 1.0 - ibeta_lower(b, a, one_minus_x, x);
}

double incomplete_beta(double a, double b, double x) {
    return incomplete_beta(a, b, x, 1.0 - x);
}

double t_cdf(double x, DegreesOfFreedom df) {
    if (std::isnan(x)) throw DomainError("t_cdf argument is NaN");
    if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
    const double nu = df.as_double();
    const double x2 = x * x;
    // Tail mass P(|T| > |x|) = I_{nu/(nu+x^2)}(nu/2, 1/2).
    const double denom = nu + x2;
    const double tail = incomplete_beta(0.5 * nu, 0.5, nu / denom, x2 / denom);
    return x > 0 ? 1.0 - 0.5 * tail : 0.5 * tail;
}

double t_quantile(double p, DegreesOfFreedom df) {
    require_probability_open(p, "probability");
    if (p == 0.5) return 0.0;
    if (p < 0.5) return -t_quantile(1.0 - p, df);

    // Bracket [lo, hi] with F(lo) < p <= F(hi), starting from the normal quantile.
    double lo = 0.0;
    double hi = std::max(1.0, normal_quantile(p));
    double f_lo = 0.5 - p;
    double f_hi = t_cdf(hi, df) - p;
    while (f_hi < 0.0) {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = t_cdf(hi, df) - p;
        if (!std::isfinite(hi)) throw ConvergenceError("t_quantile bracket diverged");
    }

    // Secant steps, with a forced bisection every third iteration.
    double x = hi;
    for (int iter = 0; iter < 400; ++iter) {
        double cand = hi - f_hi * (hi - lo) / (f_hi - f_lo);
        if (!(cand > lo && cand < hi) || iter % 3 == 2) cand = 0.5 * (lo + hi);
        const double f = t_cdf(cand, df) - p;
        x = cand;
        if (f == 0.0) return x;
        if (f < 0.0) {
            lo = cand;
            f_lo = f;
        } else {
            hi = cand;
            f_hi = f;
        }
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
        if (std::fabs(f) < 1e-15) break;
    }
    return x;
}

double noncentral_t_cdf(double x, DegreesOfFreedom df, Noncentrality ncp) {
    if (std::isnan(x)) throw DomainError("noncentral_t_cdf argument is NaN");
    const double delta = ncp.delta();
    if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
    if (delta == 0.0) return t_cdf(x, df);
    if (x < 0.0) {
        return 1.0 - noncentral_t_cdf(-x, df, Noncentrality(-delta));
    }

    const double lam = 0.5 * delta * delta;
    if (lam == 0.0) return t_cdf(x, df);
    const double nu = df.as_double();
    const double x2 = x * x;
    const double y = x2 / (x2 + nu);
    const double one_minus_y = nu / (x2 + nu);
    const double half_nu = 0.5 * nu;

    // F(x) = Phi(-delta) + 1/2 sum_j [p_j I_y(j + 1/2, nu/2) + q_j I_y(j + 1, nu/2)],
    //   p_j = e^{-lam} lam^j / j!,  q_j = delta / sqrt(2) e^{-lam} lam^j / Gamma(j + 3/2).
    auto p_weight = [&](double j) { return std::exp(-lam + j * std::log(lam) - std::lgamma(j + 1.0)); };
    auto q_weight = [&](double j) {
        return delta / std::numbers::sqrt2 *
               std::exp(-lam + j * std::log(lam) - std::lgamma(j + 1.5));
    };
    auto term = [&](double j) {
        if (y == 0.0) return 0.0;
        return p_weight(j) * incomplete_beta(j + 0.5, half_nu, y, one_minus_y) +
               q_weight(j) * incomplete_beta(j + 1.0, half_nu, y, one_minus_y);
    };

    constexpr double kTol = 1e-13;
    constexpr std::int64_t kMaxTerms = 100000;
    const auto mode = static_cast<std::int64_t>(std::floor(lam));
    const double tail_scale = 1.0 + std::fabs(delta);

    double sum = 0.0;
    std::int64_t used = 0;

    // Forward from the mode; remaining p mass bounds the truncation error.
    for (std::int64_t j = mode;; ++j) {
        const double jd = static_cast<double>(j);
        sum += term(jd);
        if (++used > kMaxTerms) {
            throw ConvergenceError("noncentral t series exceeded term guard; |ncp| too extreme");
        }
        // Past the mode, sum_{k>j} p_k <= p_{j+1} (j + 2); |q_k| <= (1 + |delta|) p_k.
        if (j > mode && tail_scale * p_weight(jd + 1.0) * (jd + 2.0) < kTol) break;
    }
    // Backward from just below the mode down to j = 0.
    for (std::int64_t j = mode - 1; j >= 0; --j) {
        const double jd = static_cast<double>(j);
        sum += term(jd);
        if (++used > kMaxTerms) {
            throw ConvergenceError("noncentral t series exceeded term guard; |ncp| too extreme");
        }
        // Below the mode p_k <= p_j for k < j, so j * p_j bounds the rest.
        if (tail_scale * p_weight(jd) * jd < kTol) break;
    }

    const double result = normal_cdf(-delta) + 0.5 * sum;
    return std::clamp(result, 0.0, 1.0);
}

double fixed_design_power(double slope, double sxx, double sigma, std::int64_t n, double alpha) {
    if (!(sxx > 0.0)) throw DomainError("S_XX must be positive");
    if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
    if (n < 3) throw DomainError("fixed-design power needs n >= 3");
    require_probability_open(alpha, "alpha");
    const double delta = slope * std::sqrt(sxx) / sigma;
    // Rejection region has probability alpha by construction under the null.
    if (delta == 0.0) return alpha;
    const DegreesOfFreedom df(n - 2);
    const double crit = t_quantile(1.0 - 0.5 * alpha, df);
    const Noncentrality ncp(delta);
    const double upper = 1.0 - noncentral_t_cdf(crit, df, ncp);
    const double lower = noncentral_t_cdf(-crit, df, ncp);
    return std::clamp(upper + lower, 0.0, 1.0);
}

}  // namespace slopesize
