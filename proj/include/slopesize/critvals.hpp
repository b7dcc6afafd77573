#pragma once

// Critical values C(n, alpha) for the slope test |T| > C.
//
// The exact route simulates the null T^2 law: reps_inner draws give one
// (1 - alpha) empirical quantile, its square root is one C; that is repeated
// reps_outer times and the mean and SD of the C values are reported. The
// normal route uses T ~ N(0, (n-2)/((n-3)(n-4))).

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "slopesize/stochastics.hpp"

namespace slopesize {

enum class CriticalValueMethod { exact_mc, normal_approx };

std::string to_string(CriticalValueMethod method);

struct CriticalValueEstimate {
    std::int64_t n = 0;
    double alpha = 0.0;
    double value = 0.0;
    double sd = 0.0;
    CriticalValueMethod method = CriticalValueMethod::exact_mc;

    friend bool operator==(const CriticalValueEstimate&, const CriticalValueEstimate&) = default;
};

CriticalValueEstimate critical_value_mc(std::int64_t n, double alpha, const SimPlan& plan);

// Several levels from the same simulated draws, in the order given.
std::vector<CriticalValueEstimate> critical_values_mc(std::int64_t n, std::span<const double> alphas,
                                                      const SimPlan& plan);

// z_{1 - alpha/2} * sqrt((n - 2) / ((n - 3)(n - 4))). Rejects n <= 4.
CriticalValueEstimate critical_value_normal(std::int64_t n, double alpha);

struct Table1Row {
    std::int64_t samplesize = 0;
    double normal10 = 0.0;
    double criticalvalue10 = 0.0;
    double normal5 = 0.0;
    double criticalvalue5 = 0.0;
    double normal1 = 0.0;
    double criticalvalue1 = 0.0;
};

// Rows for every n in [n_first, n_last]; both ends within [5, 10^6].
std::vector<Table1Row> table1(std::int64_t n_first, std::int64_t n_last, const SimPlan& plan);

struct CriticalValueCacheKey {
    std::int64_t n = 0;
    double alpha = 0.0;
    std::int64_t reps_inner = 0;
    std::int64_t reps_outer = 0;
    std::uint64_t master_seed = 0;

    static CriticalValueCacheKey from(std::int64_t n, double alpha, const SimPlan& plan);
    auto tie() const { return std::tie(n, alpha, reps_inner, reps_outer, master_seed); }
    friend bool operator<(const CriticalValueCacheKey& a, const CriticalValueCacheKey& b) {
        return a.tie() < b.tie();
    }
};

// Text-file store of exact critical values, one checksummed record per line:
//   cv1 <n> <alpha> <reps_inner> <reps_outer> <seed> <value> <sd> <fnv1a-64 hex>
// Records that fail to parse or whose checksum mismatches are ignored on
// load and dropped on the next write. I/O failures are collected in
// diagnostics() and the cache keeps working from memory. Thread-safe.
class CriticalValueCache {
public:
    // Memory-only cache.
    CriticalValueCache() = default;
    explicit CriticalValueCache(std::filesystem::path path);

    std::optional<CriticalValueEstimate> lookup(const CriticalValueCacheKey& key) const;
    void store(const CriticalValueCacheKey& key, const CriticalValueEstimate& estimate);
    void clear();

    std::size_t size() const;
    std::vector<std::pair<CriticalValueCacheKey, CriticalValueEstimate>> entries() const;
    std::vector<std::string> diagnostics() const;
    const std::optional<std::filesystem::path>& path() const { return path_; }

    static std::string format_record(const CriticalValueCacheKey& key, double value, double sd);

private:
    void load();
    void persist();

    std::optional<std::filesystem::path> path_;
    mutable std::mutex mutex_;
    std::map<CriticalValueCacheKey, CriticalValueEstimate> entries_;
    std::vector<std::string> diagnostics_;
};

// Returns the cached exact estimate for (n, alpha, plan) or computes and stores it.
CriticalValueEstimate cached_critical_value(std::int64_t n, double alpha, const SimPlan& plan,
                                            CriticalValueCache& cache);

// Supplies C(n, alpha) to the power simulations. Exact values go through the cache.
class CriticalValueSource {
public:
    CriticalValueSource(CriticalValueMethod method, SimPlan plan, CriticalValueCache* cache = nullptr);

    CriticalValueEstimate operator()(std::int64_t n, double alpha) const;
    CriticalValueMethod method() const { return method_; }

private:
    CriticalValueMethod method_;
    SimPlan plan_;
    CriticalValueCache* cache_;
    std::shared_ptr<CriticalValueCache> scratch_;
};

}  // namespace slopesize
