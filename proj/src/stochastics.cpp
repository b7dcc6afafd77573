#include "slopesize/stochastics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "slopesize/error.hpp"

namespace slopesize {

PhiloxEngine::PhiloxEngine(const StreamKey& key)
    : counter_{static_cast<std::uint32_t>(key.task_id),
               static_cast<std::uint32_t>(key.task_id >> 32), key.stream_id, 0u},
      key_{static_cast<std::uint32_t>(key.master_seed),
           static_cast<std::uint32_t>(key.master_seed >> 32)} {}

double Stream::normal(double mu, double sd) {
    if (sd < 0.0) throw DomainError("standard deviation must be nonnegative");
    if (sd == 0.0) return mu;
    return mu + sd * normal();
}

double Stream::gamma(double shape) {
    if (!(shape > 0.0)) throw DomainError("gamma shape must be positive");
    if (shape < 1.0) {
        // G(a) = G(a + 1) * U^(1/a)
        const double g = gamma(shape + 1.0);
        return g * std::exp(std::log(uniform()) / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double z, v;
        do {
            z = normal();
            v = 1.0 + c * z;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        const double z2 = z * z;
        if (u < 1.0 - 0.0331 * z2 * z2) return d * v;
        if (std::log(u) < 0.5 * z2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double Stream::chisq(std::int64_t df) {
    if (df < 1) throw DomainError("chi-square degrees of freedom must be >= 1");
    double x;
    do {
        x = 2.0 * gamma(0.5 * static_cast<double>(df));
    } while (!(x > 0.0));
    return x;
}

SimPlan SimPlan::paper_defaults(std::uint64_t seed) {
    SimPlan plan;
    plan.master_seed = seed;
    return plan;
}

SimPlan SimPlan::fast(std::uint64_t seed) {
    SimPlan plan;
    plan.reps_inner = 1000;
    plan.reps_outer = 50;
    plan.power_trials = 1000;
    plan.master_seed = seed;
    return plan;
}

void SimPlan::validate() const {
    if (reps_inner < 100) {
        throw DomainError("reps_inner must be >= 100, got " + std::to_string(reps_inner));
    }
    if (reps_outer < 1) throw DomainError("reps_outer must be >= 1");
    if (power_trials < 1) throw DomainError("power_trials must be >= 1");
    if (search_trials < 1) throw DomainError("search_trials must be >= 1");
}

double sample_normal(const StreamKey& key, double mu, double sd) {
    if (sd < 0.0) throw DomainError("standard deviation must be nonnegative");
    if (sd == 0.0) return mu;
    Stream stream(key);
    return stream.normal(mu, sd);
}

double sample_chisq(const StreamKey& key, std::int64_t df) {
    if (df < 1) throw DomainError("chi-square degrees of freedom must be >= 1");
    Stream stream(key);
    return stream.chisq(df);
}

double empirical_quantile_inplace(std::span<double> samples, double p) {
    if (samples.empty()) throw DomainError("empirical_quantile needs at least one sample");
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
    const std::size_t m = samples.size();
    const double h = static_cast<double>(m - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo);
    auto lo_it = samples.begin() + static_cast<std::ptrdiff_t>(lo);
    std::nth_element(samples.begin(), lo_it, samples.end());
    const double x_lo = *lo_it;
    if (lo + 1 >= m || frac == 0.0) return x_lo;
    const double x_hi = *std::min_element(lo_it + 1, samples.end());
    return x_lo + frac * (x_hi - x_lo);
}

double empirical_quantile(std::span<const double> samples, double p) {
    std::vector<double> copy(samples.begin(), samples.end());
    return empirical_quantile_inplace(copy, p);
}

}  // namespace slopesize
