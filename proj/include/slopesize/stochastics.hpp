#pragma once

// Keyed random streams and Monte Carlo quantiles.
//
// Every variate in the library is drawn from a Stream built from a StreamKey
// (master seed, replicate index, role). A replicate never touches a shared
// generator, so results do not depend on how replicates are scheduled
// across workers.

#include <array>
#include <cstdint>
#include <limits>
#include <span>

#include <boost/random/normal_distribution.hpp>

namespace slopesize {

struct StreamKey {
    std::uint64_t master_seed = 0;
    std::uint64_t task_id = 0;
    std::uint32_t stream_id = 0;

    friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

// Philox4x32-10 counter-based generator. The key holds the master seed; the
// counter holds (task_id, stream_id, block index).
class PhiloxEngine {
public:
    using result_type = std::uint64_t;

    explicit PhiloxEngine(const StreamKey& key);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (next_ >= 4) refill();
        const std::uint64_t hi = buffer_[next_];
        const std::uint64_t lo = buffer_[next_ + 1];
        next_ += 2;
        return (hi << 32) | lo;
    }

    // One raw Philox4x32-10 block; exposed for known-answer tests.
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                              std::array<std::uint32_t, 2> key) {
        std::uint32_t c0 = counter[0], c1 = counter[1], c2 = counter[2], c3 = counter[3];
        std::uint32_t k0 = key[0], k1 = key[1];
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c0;
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c2;
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
            c0 = hi1 ^ c1 ^ k0;
            c1 = lo1;
            c2 = hi0 ^ c3 ^ k1;
            c3 = lo0;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        return {c0, c1, c2, c3};
    }

private:
    void refill() {
        buffer_ = block(counter_, key_);
        ++counter_[3];
        next_ = 0;
    }

    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> buffer_{};
    int next_ = 4;
};

// Value-semantic variate source bound to one StreamKey.
class Stream {
public:
    explicit Stream(const StreamKey& key) : engine_(key) {}

    // Uniform on the open interval (0, 1): 53 random bits offset by half an ulp.
    double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
    // Ziggurat method.
    double normal() { return std_normal_(engine_); }
    double normal(double mu, double sd);
    // Gamma(shape, 1): Marsaglia-Tsang squeeze for shape >= 1, boosted for shape < 1.
    double gamma(double shape);
    double chisq(std::int64_t df);

private:
    PhiloxEngine engine_;
    boost::random::normal_distribution<double> std_normal_;
};

// Role tags for StreamKey::stream_id. Keeping them distinct separates the
// random numbers used by unrelated computations that share a master seed.
namespace streams {
inline constexpr std::uint32_t kCriticalValue = 1;
inline constexpr std::uint32_t kPowerSearch = 2;
inline constexpr std::uint32_t kPowerValidation = 3;
inline constexpr std::uint32_t kCorrelationPower = 4;
inline constexpr std::uint32_t kNullRegression = 5;
inline constexpr std::uint32_t kUser = 16;
// Degenerate-fit resamples flip into this high bit range.
inline constexpr std::uint32_t kResampleShift = 20;
}  // namespace streams

// Replication counts for the Monte Carlo procedures.
//   reps_inner    null T^2 draws per critical-value quantile
//   reps_outer    repeats of the quantile step, and of the power validation step
//   power_trials  simulated regressions behind one power estimate
//   search_trials simulated regressions per probe in the sample-size search
struct SimPlan {
    std::int64_t reps_inner = 10000;
    std::int64_t reps_outer = 1000;
    std::int64_t power_trials = 1000;
    std::int64_t search_trials = 20000;
    std::uint64_t master_seed = 0;
    // Worker threads; 0 means hardware concurrency. Never affects results.
    unsigned workers = 0;

    static SimPlan paper_defaults(std::uint64_t seed);
    // 1,000 inner / 50 outer / 1,000 power trials.
    static SimPlan fast(std::uint64_t seed);

    // Throws DomainError on reps_inner < 100 or any nonpositive count.
    void validate() const;
};

double sample_normal(const StreamKey& key, double mu, double sd);
double sample_chisq(const StreamKey& key, std::int64_t df);

// Linear interpolation between order statistics: with m samples and
// h = (m - 1) p, returns x(floor h) + frac(h) * (x(floor h + 1) - x(floor h)).
double empirical_quantile(std::span<const double> samples, double p);

// Same rule, partially reordering `samples` in place (no copy).
double empirical_quantile_inplace(std::span<double> samples, double p);

}  // namespace slopesize
