#include "slopesize/critvals.hpp"

#include <algorithm>
#include <array>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <system_error>

#include "slopesize/distmath.hpp"
#include "slopesize/error.hpp"
#include "slopesize/exactnull.hpp"
#include "slopesize/parallel.hpp"

namespace slopesize {

namespace {

void require_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("alpha must lie in (0, 1), got " + std::to_string(alpha));
    }
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char ch : text) {
        hash ^= ch;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::string record_body(const CriticalValueCacheKey& key, double value, double sd) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "cv1 %" PRId64 " %.17g %" PRId64 " %" PRId64 " %" PRIu64 " %.17g %.17g",
                  key.n, key.alpha, key.reps_inner, key.reps_outer, key.master_seed, value, sd);
    return buf;
}

struct MeanSd {
    double mean;
    double sd;
};

MeanSd mean_sd(const std::vector<double>& xs) {
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

}  // namespace

std::string to_string(CriticalValueMethod method) {
    return method == CriticalValueMethod::exact_mc ? "exact_mc" : "normal_approx";
}

std::vector<CriticalValueEstimate> critical_values_mc(std::int64_t n, std::span<const double> alphas,
                                                      const SimPlan& plan) {
    if (n < 3) throw DomainError("critical values need n >= 3, got " + std::to_string(n));
    for (double a : alphas) require_alpha(a);
    plan.validate();

    const auto outer = static_cast<std::size_t>(plan.reps_outer);
    const auto inner = static_cast<std::size_t>(plan.reps_inner);
    // per_alpha[k][r] = C from outer replicate r at level alphas[k].
    std::vector<std::vector<double>> per_alpha(alphas.size(), std::vector<double>(outer));

    parallel_chunks(plan.reps_outer, plan.workers, [&](std::int64_t begin, std::int64_t end) {
        std::vector<double> draws(inner);
        for (std::int64_t r = begin; r < end; ++r) {
            Stream stream({plan.master_seed, static_cast<std::uint64_t>(r), streams::kCriticalValue});
            for (auto& d : draws) d = sample_t2_null(stream, n);
            for (std::size_t k = 0; k < alphas.size(); ++k) {
                const double c2 = empirical_quantile_inplace(draws, 1.0 - alphas[k]);
                per_alpha[k][static_cast<std::size_t>(r)] = std::sqrt(c2);
            }
        }
    });

    std::vector<CriticalValueEstimate> out;
    out.reserve(alphas.size());
    for (std::size_t k = 0; k < alphas.size(); ++k) {
        const auto [mean, sd] = mean_sd(per_alpha[k]);
        out.push_back({n, alphas[k], mean, sd, CriticalValueMethod::exact_mc});
    }
    return out;
}

CriticalValueEstimate critical_value_mc(std::int64_t n, double alpha, const SimPlan& plan) {
    const std::array<double, 1> alphas{alpha};
    return critical_values_mc(n, alphas, plan).front();
}

CriticalValueEstimate critical_value_normal(std::int64_t n, double alpha) {
    if (n <= 4) throw DomainError("n must exceed 4 for the normal approximation (got " + std::to_string(n) + ")");
    require_alpha(alpha);
    const auto nd = static_cast<double>(n);
    const double z = normal_quantile(1.0 - 0.5 * alpha);
    const double value = z * std::sqrt((nd - 2.0) / ((nd - 3.0) * (nd - 4.0)));
    return {n, alpha, value, 0.0, CriticalValueMethod::normal_approx};
}

std::vector<Table1Row> table1(std::int64_t n_first, std::int64_t n_last, const SimPlan& plan) {
    if (n_first < 5 || n_last > 1000000 || n_first > n_last) {
        throw DomainError("table 1 range must satisfy 5 <= first <= last <= 1000000");
    }
    constexpr std::array<double, 3> kLevels{0.10, 0.05, 0.01};
    std::vector<Table1Row> rows;
    for (std::int64_t n = n_first; n <= n_last; ++n) {
        const auto exact = critical_values_mc(n, kLevels, plan);
        Table1Row row;
        row.samplesize = n;
        row.normal10 = critical_value_normal(n, 0.10).value;
        row.criticalvalue10 = exact[0].value;
        row.normal5 = critical_value_normal(n, 0.05).value;
        row.criticalvalue5 = exact[1].value;
        row.normal1 = critical_value_normal(n, 0.01).value;
        row.criticalvalue1 = exact[2].value;
        rows.push_back(row);
    }
    return rows;
}

CriticalValueCacheKey CriticalValueCacheKey::from(std::int64_t n, double alpha, const SimPlan& plan) {
    return {n, alpha, plan.reps_inner, plan.reps_outer, plan.master_seed};
}

std::string CriticalValueCache::format_record(const CriticalValueCacheKey& key, double value, double sd) {
    const std::string body = record_body(key, value, sd);
    char hash[32];
    std::snprintf(hash, sizeof hash, " %016" PRIx64, fnv1a(body));
    return body + hash;
}

CriticalValueCache::CriticalValueCache(std::filesystem::path path) : path_(std::move(path)) {
    load();
}

void CriticalValueCache::load() {
    std::error_code ec;
    if (!std::filesystem::exists(*path_, ec)) return;
    std::ifstream in(*path_);
    if (!in) {
        diagnostics_.push_back("cannot read cache file " + path_->string());
        return;
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream is(line);
        std::string tag, hash_hex;
        CriticalValueCacheKey key;
        double value = 0.0, sd = 0.0;
        const bool parsed = static_cast<bool>(is >> tag >> key.n >> key.alpha >> key.reps_inner >>
                                              key.reps_outer >> key.master_seed >> value >> sd >> hash_hex);
        const bool valid = parsed && tag == "cv1" && format_record(key, value, sd) == line &&
                           value > 0.0 && std::isfinite(value) && sd >= 0.0;
        if (!valid) {
            diagnostics_.push_back("corrupt cache record at " + path_->string() + ":" +
                                   std::to_string(line_no) + " ignored");
            continue;
        }
        entries_[key] = {key.n, key.alpha, value, sd, CriticalValueMethod::exact_mc};
    }
}

void CriticalValueCache::persist() {
    if (!path_) return;
    std::error_code ec;
    if (path_->has_parent_path()) std::filesystem::create_directories(path_->parent_path(), ec);
    const std::filesystem::path tmp = path_->string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) {
            diagnostics_.push_back("cannot write cache file " + tmp.string());
            return;
        }
        for (const auto& [key, est] : entries_) out << format_record(key, est.value, est.sd) << '\n';
        if (!out) {
            diagnostics_.push_back("write failed for cache file " + tmp.string());
            return;
        }
    }
    std::filesystem::rename(tmp, *path_, ec);
    if (ec) diagnostics_.push_back("cannot replace cache file " + path_->string() + ": " + ec.message());
}

std::optional<CriticalValueEstimate> CriticalValueCache::lookup(const CriticalValueCacheKey& key) const {
    std::lock_guard lock(mutex_);
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void CriticalValueCache::store(const CriticalValueCacheKey& key, const CriticalValueEstimate& estimate) {
    std::lock_guard lock(mutex_);
    entries_[key] = estimate;
    persist();
}

void CriticalValueCache::clear() {
    std::lock_guard lock(mutex_);
    entries_.clear();
    if (path_) {
        std::error_code ec;
        std::filesystem::remove(*path_, ec);
        if (ec) diagnostics_.push_back("cannot remove cache file " + path_->string() + ": " + ec.message());
    }
}

std::size_t CriticalValueCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

std::vector<std::pair<CriticalValueCacheKey, CriticalValueEstimate>> CriticalValueCache::entries() const {
    std::lock_guard lock(mutex_);
    return {entries_.begin(), entries_.end()};
}

std::vector<std::string> CriticalValueCache::diagnostics() const {
    std::lock_guard lock(mutex_);
    return diagnostics_;
}

CriticalValueEstimate cached_critical_value(std::int64_t n, double alpha, const SimPlan& plan,
                                            CriticalValueCache& cache) {
    const auto key = CriticalValueCacheKey::from(n, alpha, plan);
    if (auto hit = cache.lookup(key)) return *hit;
    const auto estimate = critical_value_mc(n, alpha, plan);
    cache.store(key, estimate);
    return estimate;
}

CriticalValueSource::CriticalValueSource(CriticalValueMethod method, SimPlan plan, CriticalValueCache* cache)
    : method_(method), plan_(plan), cache_(cache), scratch_(std::make_shared<CriticalValueCache>()) {}

CriticalValueEstimate CriticalValueSource::operator()(std::int64_t n, double alpha) const {
    if (method_ == CriticalValueMethod::normal_approx) return critical_value_normal(n, alpha);
    return cached_critical_value(n, alpha, plan_, cache_ ? *cache_ : *scratch_);
}

}  // namespace slopesize
