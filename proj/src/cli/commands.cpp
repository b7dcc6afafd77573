#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "slopesize/cli.hpp"
#include "slopesize/corroute.hpp"
#include "slopesize/critvals.hpp"
#include "slopesize/distmath.hpp"
#include "slopesize/error.hpp"
#include "slopesize/powersim.hpp"
#include "slopesize/report.hpp"

namespace slopesize::cli {

namespace {

class UsageError : public DomainError {
public:
    using DomainError::DomainError;
};

// Flags shared by every Monte Carlo command.
struct SimFlags {
    std::optional<std::uint64_t> seed;
    bool fast = false;
    std::optional<std::int64_t> reps_inner;
    std::optional<std::int64_t> reps_outer;
    std::optional<std::int64_t> power_trials;
    std::optional<std::int64_t> search_trials;
    unsigned workers = 0;
    std::string cache_path;
    std::string method = "exact";

    void attach(CLI::App& app, bool with_method = true) {
        app.add_option("--seed", seed, "Master seed (default: $SLOPESIZE_SEED, else random and echoed)");
        app.add_flag("--fast", fast, "Preset 1000 inner / 50 outer / 1000 power trials");
        app.add_option("--reps-inner", reps_inner, "Null draws per critical-value quantile");
        app.add_option("--reps-outer", reps_outer, "Outer repeats (critical values and power validation)");
        app.add_option("--power-trials", power_trials, "Simulated regressions per power estimate");
        app.add_option("--search-trials", search_trials, "Simulated regressions per sample-size probe");
        app.add_option("--workers", workers, "Worker threads (0 = all cores); never changes results");
        app.add_option("--cache", cache_path, "Critical-value cache file (default: $SLOPESIZE_CACHE)");
        if (with_method) {
            app.add_option("--method", method, "Critical values: exact (Monte Carlo) or normal")
                ->check(CLI::IsMember({"exact", "normal"}));
        }
    }

    std::uint64_t resolve_seed(std::ostream& err) const {
        if (seed) return *seed;
        if (const char* env = std::getenv(kSeedEnv); env && *env) {
            try {
                return std::stoull(env);
            } catch (const std::exception&) {
                throw UsageError(std::string(kSeedEnv) + " is not an unsigned integer: " + env);
            }
        }
        std::random_device rd;
        const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        err << "no --seed given; drew seed " << s << " (pass --seed " << s << " to replay)\n";
        return s;
    }

    SimPlan plan(std::uint64_t resolved_seed) const {
        SimPlan p = fast ? SimPlan::fast(resolved_seed) : SimPlan::paper_defaults(resolved_seed);
        if (reps_inner) p.reps_inner = *reps_inner;
        if (reps_outer) p.reps_outer = *reps_outer;
        if (power_trials) p.power_trials = *power_trials;
        if (search_trials) p.search_trials = *search_trials;
        p.workers = workers;
        p.validate();
        return p;
    }

    std::unique_ptr<CriticalValueCache> open_cache(std::ostream& err) const {
        std::string path = cache_path;
        if (path.empty()) {
            if (const char* env = std::getenv(kCacheEnv); env && *env) path = env;
        }
        auto cache = path.empty() ? std::make_unique<CriticalValueCache>()
                                  : std::make_unique<CriticalValueCache>(path);
        for (const auto& d : cache->diagnostics()) err << "cache: " << d << '\n';
        return cache;
    }

    CriticalValueMethod critical_method() const {
        return method == "normal" ? CriticalValueMethod::normal_approx : CriticalValueMethod::exact_mc;
    }
};

void report_cache_diagnostics(const CriticalValueCache& cache, std::size_t already_reported, std::ostream& err) {
    const auto diags = cache.diagnostics();
    for (std::size_t i = already_reported; i < diags.size(); ++i) err << "cache: " << diags[i] << '\n';
}

void require_probability_flag(double v, const char* flag) {
    if (!(v > 0.0 && v < 1.0)) throw UsageError(std::string(flag) + " must lie in (0, 1)");
}

std::string fmt(double v, int precision = 6) {
    std::ostringstream os;
    os << std::setprecision(precision) << v;
    return os.str();
}

// ---------------------------------------------------------------------------
// critval

struct CritvalCommand {
    std::int64_t n = 0;
    double alpha = 0.05;
    std::string format = "text";
    SimFlags sim;

    void attach(CLI::App& app) {
        app.add_option("--n", n, "Sample size")->required();
        app.add_option("--alpha", alpha, "Significance level")->required();
        app.add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
        sim.attach(app);
    }

    int run(std::ostream& out, std::ostream& err) const {
        require_probability_flag(alpha, "--alpha");
        CriticalValueEstimate est;
        std::optional<std::uint64_t> seed;
        if (sim.critical_method() == CriticalValueMethod::normal_approx) {
            est = critical_value_normal(n, alpha);
        } else {
            seed = sim.resolve_seed(err);
            const auto plan = sim.plan(*seed);
            auto cache = sim.open_cache(err);
            const auto seen = cache->diagnostics().size();
            est = cached_critical_value(n, alpha, plan, *cache);
            report_cache_diagnostics(*cache, seen, err);
        }
        if (format == "json") {
            nlohmann::json j{{"n", est.n},       {"alpha", est.alpha},
                             {"value", est.value}, {"sd", est.sd},
                             {"method", to_string(est.method)}};
            if (seed) j["seed"] = *seed;
            out << j.dump(2) << '\n';
            return kOk;
        }
        out << "n: " << est.n << '\n'
            << "alpha: " << fmt(est.alpha) << '\n'
            << "method: " << to_string(est.method) << '\n'
            << "value: " << fmt(est.value) << '\n'
            << "sd: " << fmt(est.sd) << '\n';
        if (seed) out << "seed: " << *seed << '\n';
        return kOk;
    }
};

// ---------------------------------------------------------------------------
// table

constexpr double kPaperLambdas[] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
constexpr double kPaperPowers[] = {0.80, 0.90, 0.95, 0.99};

double table_alpha(int which) {
    switch (which) {
        case 2: case 5: return 0.10;
        case 3: case 6: return 0.05;
        case 4: case 7: return 0.01;
        default: return 0.0;
    }
}

struct TableCommand {
    int which = 1;
    std::string format = "csv";
    std::string out_path;
    std::int64_t n_first = 20;
    std::int64_t n_last = 100;
    std::vector<double> lambdas{std::begin(kPaperLambdas), std::end(kPaperLambdas)};
    std::vector<double> powers{std::begin(kPaperPowers), std::end(kPaperPowers)};
    SimFlags sim;

    void attach(CLI::App& app) {
        app.add_option("--which", which, "Table number, 1-7")->required();
        app.add_option("--format", format, "csv, markdown or json")
            ->check(CLI::IsMember({"csv", "markdown", "md", "json"}));
        app.add_option("--out", out_path, "Output file (default: stdout)");
        app.add_option("--n-first", n_first, "Table 1: first sample size");
        app.add_option("--n-last", n_last, "Table 1: last sample size");
        app.add_option("--lambdas", lambdas, "Tables 2-7: effect sizes")->delimiter(',');
        app.add_option("--powers", powers, "Tables 2-7: target powers")->delimiter(',');
        sim.attach(app);
    }

    int run(std::ostream& out, std::ostream& err) const {
        if (which < 1 || which > 7) throw UsageError("--which must be one of 1..7, got " + std::to_string(which));
        for (double p : powers) require_probability_flag(p, "--powers");
        const auto format_kind = *report::parse_format(format);

        const auto start = std::chrono::steady_clock::now();
        const std::uint64_t seed = sim.resolve_seed(err);
        const auto plan = sim.plan(seed);

        // Open the destination before the (possibly long) computation.
        std::ofstream file;
        if (!out_path.empty()) {
            file.open(out_path, std::ios::trunc);
            if (!file) throw UsageError("cannot write to " + out_path);
        }
        std::ostream& dest = out_path.empty() ? out : file;

        report::Table table;
        if (which == 1) {
            table = report::table1_report(table1(n_first, n_last, plan));
        } else {
            auto cache = sim.open_cache(err);
            const auto seen = cache->diagnostics().size();
            const CriticalValueSource source(sim.critical_method(), plan, cache.get());
            const double alpha = table_alpha(which);
            if (which <= 4) {
                table = report::power_report(power_table(alpha, lambdas, powers, plan, source));
            } else {
                table = report::contrast_report(contrast_table(alpha, lambdas, powers, plan, source));
            }
            report_cache_diagnostics(*cache, seen, err);
        }
        report::write(dest, table, format_kind);
        if (!dest) throw UsageError("write failed for " + (out_path.empty() ? std::string("stdout") : out_path));

        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        err << "table " << which << ": " << table.rows.size() << " rows, seed " << seed << ", reps "
            << plan.reps_inner << "/" << plan.reps_outer << "/" << plan.power_trials << ", "
            << std::fixed << std::setprecision(1) << secs << " s" << std::defaultfloat;
        if (!out_path.empty()) err << ", written to " << out_path;
        err << '\n';
        return kOk;
    }
};

// ---------------------------------------------------------------------------
// curve

struct CurveCommand {
    double lambda_min = 0.0;
    double lambda_max = 3.0;
    double step = 0.05;
    std::string format = "csv";

    void attach(CLI::App& app) {
        app.add_option("--lambda-min", lambda_min, "First effect size");
        app.add_option("--lambda-max", lambda_max, "Last effect size");
        app.add_option("--step", step, "Grid step")->check(CLI::PositiveNumber);
        app.add_option("--format", format, "csv, markdown or json")
            ->check(CLI::IsMember({"csv", "markdown", "md", "json"}));
    }

    int run(std::ostream& out, std::ostream&) const {
        if (lambda_max < lambda_min) throw UsageError("--lambda-max must be >= --lambda-min");
        std::vector<double> grid;
        const auto count = static_cast<std::int64_t>(std::floor((lambda_max - lambda_min) / step + 1e-9));
        for (std::int64_t i = 0; i <= count; ++i) grid.push_back(lambda_min + static_cast<double>(i) * step);
        report::write(out, report::curve_report(rho_lambda_curve(grid)), *report::parse_format(format));
        return kOk;
    }
};

// ---------------------------------------------------------------------------
// samplesize

struct SampleSizeCommand {
    std::string route = "slope";
    std::optional<double> lambda;
    std::optional<double> rho;
    double alpha = 0.05;
    double power = 0.80;
    std::int64_t ceiling = 1000000;
    double slack = 0.005;
    SimFlags sim;

    void attach(CLI::App& app) {
        app.add_option("--route", route, "slope or corr")->check(CLI::IsMember({"slope", "corr"}));
        app.add_option("--lambda", lambda, "Effect size beta1 * sigma_x / sigma");
        app.add_option("--rho", rho, "Correlation between X and Y");
        app.add_option("--alpha", alpha, "Significance level");
        app.add_option("--power", power, "Target power");
        app.add_option("--ceiling", ceiling, "Largest n the search may try");
        app.add_option("--slack", slack, "Slope route: accept n once power >= target - slack");
        sim.attach(app);
    }

    int run(std::ostream& out, std::ostream& err) const {
        if (lambda.has_value() == rho.has_value()) throw UsageError("give exactly one of --lambda or --rho");
        require_probability_flag(alpha, "--alpha");
        require_probability_flag(power, "--power");
        if ((lambda && *lambda == 0.0) || (rho && *rho == 0.0)) throw UsageError("effect size must be nonzero");

        if (route == "corr") {
            double r;
            if (lambda) {
                r = lambda_to_rho(EffectSize(*lambda));
                out << "converted lambda " << fmt(*lambda) << " to rho " << std::fixed << std::setprecision(4) << r
                    << std::defaultfloat << " via rho = lambda / sqrt(1 + lambda^2)\n";
            } else {
                r = *rho;
            }
            const auto result = find_sample_size_corr(r, alpha, power, ceiling);
            out << "route: correlation\n"
                << "rho: " << fmt(r) << '\n'
                << "alpha: " << fmt(alpha) << '\n'
                << "target_power: " << fmt(power) << '\n'
                << "n: " << result.n << '\n'
                << "power_at_n: " << fmt(result.validated_mean) << '\n';
            return kOk;
        }

        double l;
        if (rho) {
            l = rho_to_lambda(*rho).value();
            out << "converted rho " << fmt(*rho) << " to lambda " << fmt(l) << " via lambda = rho / sqrt(1 - rho^2)\n";
        } else {
            l = *lambda;
        }
        const std::uint64_t seed = sim.resolve_seed(err);
        const auto plan = sim.plan(seed);
        auto cache = sim.open_cache(err);
        const auto seen = cache->diagnostics().size();
        const CriticalValueSource source(sim.critical_method(), plan, cache.get());
        SearchOptions options;
        options.n_ceiling = ceiling;
        options.slack = slack;
        const auto result = find_sample_size_slope(EffectSize(l), alpha, power, plan, source, options);
        report_cache_diagnostics(*cache, seen, err);
        out << "route: slope\n"
            << "lambda: " << fmt(l) << '\n'
            << "alpha: " << fmt(alpha) << '\n'
            << "target_power: " << fmt(power) << '\n'
            << "n: " << result.n << '\n'
            << "validated_mean: " << fmt(result.validated_mean) << '\n'
            << "validated_sd: " << fmt(result.validated_sd) << '\n'
            << "seed: " << seed << '\n';
        return kOk;
    }
};

// ---------------------------------------------------------------------------
// power

struct PowerCommand {
    std::string route = "slope";
    std::optional<std::int64_t> n;
    std::optional<double> lambda;
    std::optional<double> rho;
    std::optional<double> slope;
    std::optional<double> sxx;
    std::optional<double> sigma;
    double alpha = 0.05;
    bool monte_carlo = false;
    SimFlags sim;

    void attach(CLI::App& app) {
        app.add_option("--route", route, "slope, corr or fixed")->check(CLI::IsMember({"slope", "corr", "fixed"}));
        app.add_option("--n", n, "Sample size")->required();
        app.add_option("--lambda", lambda, "Effect size (slope route)");
        app.add_option("--rho", rho, "Correlation (corr route)");
        app.add_option("--A", slope, "Alternative slope (fixed route)");
        app.add_option("--sxx", sxx, "Fixed-design S_XX (fixed route)");
        app.add_option("--sigma", sigma, "Error standard deviation (fixed route)");
        app.add_option("--alpha", alpha, "Significance level");
        app.add_flag("--mc", monte_carlo, "Corr route: also run the Monte Carlo estimate");
        sim.attach(app);
    }

    int run(std::ostream& out, std::ostream& err) const {
        require_probability_flag(alpha, "--alpha");
        const bool fixed_params = slope || sxx || sigma;
        if (route == "fixed") {
            if (lambda || rho) throw UsageError("fixed route takes --A, --sxx and --sigma, not --lambda/--rho");
            if (!(slope && sxx && sigma)) throw UsageError("fixed route needs --A, --sxx and --sigma");
            const double p = fixed_design_power(*slope, *sxx, *sigma, *n, alpha);
            out << "route: fixed\n"
                << "n: " << *n << '\n'
                << "delta: " << fmt(*slope * std::sqrt(*sxx) / *sigma) << '\n'
                << "power: " << fmt(p) << '\n';
            return kOk;
        }
        if (fixed_params) throw UsageError("--A/--sxx/--sigma belong to the fixed route");

        if (route == "corr") {
            if (lambda.has_value() == rho.has_value()) throw UsageError("corr route needs exactly one of --rho or --lambda");
            const double r = rho ? *rho : lambda_to_rho(EffectSize(*lambda));
            out << "route: correlation\n"
                << "n: " << *n << '\n'
                << "rho: " << fmt(r) << '\n'
                << "power: " << fmt(corr_power_approx(*n, r, alpha)) << '\n';
            if (monte_carlo) {
                const std::uint64_t seed = sim.resolve_seed(err);
                const auto est = corr_power_mc(*n, r, alpha, sim.plan(seed));
                out << "power_mc: " << fmt(est.power) << '\n'
                    << "power_mc_se: " << fmt(est.sd) << '\n'
                    << "seed: " << seed << '\n';
            }
            return kOk;
        }

        if (rho) throw UsageError("slope route takes --lambda");
        if (!lambda) throw UsageError("slope route needs --lambda");
        const std::uint64_t seed = sim.resolve_seed(err);
        const auto plan = sim.plan(seed);
        auto cache = sim.open_cache(err);
        const CriticalValueSource source(sim.critical_method(), plan, cache.get());
        const auto c = source(*n, alpha);
        const auto v = validate_power_slope(*n, EffectSize(*lambda), alpha, c, plan);
        out << "route: slope\n"
            << "n: " << *n << '\n'
            << "lambda: " << fmt(*lambda) << '\n'
            << "critical_value: " << fmt(c.value) << '\n'
            << "power: " << fmt(v.mean) << '\n'
            << "sd: " << fmt(v.sd) << '\n'
            << "seed: " << seed << '\n';
        return kOk;
    }
};

// ---------------------------------------------------------------------------
// cache

struct CacheCommand {
    std::string action = "list";
    std::string cache_path;

    void attach(CLI::App& app) {
        app.add_option("action", action, "list, clear or path")->check(CLI::IsMember({"list", "clear", "path"}));
        app.add_option("--cache", cache_path, "Cache file (default: $SLOPESIZE_CACHE)");
    }

    int run(std::ostream& out, std::ostream& err) const {
        std::string path = cache_path;
        if (path.empty()) {
            if (const char* env = std::getenv(kCacheEnv); env && *env) path = env;
        }
        if (path.empty()) throw UsageError("no cache file: pass --cache or set " + std::string(kCacheEnv));
        if (action == "path") {
            out << path << '\n';
            return kOk;
        }
        CriticalValueCache cache{std::filesystem::path(path)};
        for (const auto& d : cache.diagnostics()) err << "cache: " << d << '\n';
        if (action == "clear") {
            const auto count = cache.size();
            cache.clear();
            out << "removed " << count << " entries from " << path << '\n';
            return kOk;
        }
        out << "n,alpha,reps_inner,reps_outer,seed,value,sd\n";
        for (const auto& [key, est] : cache.entries()) {
            out << key.n << ',' << fmt(key.alpha) << ',' << key.reps_inner << ',' << key.reps_outer << ','
                << key.master_seed << ',' << fmt(est.value, 17) << ',' << fmt(est.sd, 17) << '\n';
        }
        return kOk;
    }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sample size and power for the slope test in simple linear regression with a normal predictor",
                 "slopesize"};
    app.require_subcommand(1);

    CritvalCommand critval;
    TableCommand table;
    CurveCommand curve;
    SampleSizeCommand samplesize;
    PowerCommand power;
    CacheCommand cache;

    critval.attach(*app.add_subcommand("critval", "Critical value C(n, alpha) for |T| > C"));
    table.attach(*app.add_subcommand("table", "Regenerate one of the seven result tables"));
    curve.attach(*app.add_subcommand("curve", "Tabulate rho against lambda"));
    samplesize.attach(*app.add_subcommand("samplesize", "Required sample size for a target power"));
    power.attach(*app.add_subcommand("power", "Power at a given n"));
    cache.attach(*app.add_subcommand("cache", "Inspect or clear the critical-value cache"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        const auto* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        if (name == "critval") return critval.run(out, err);
        if (name == "table") return table.run(out, err);
        if (name == "curve") return curve.run(out, err);
        if (name == "samplesize") return samplesize.run(out, err);
        if (name == "power") return power.run(out, err);
        if (name == "cache") return cache.run(out, err);
        err << "error: unknown command " << name << '\n';
        return kUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    }
}

}  // namespace slopesize::cli
