#include "slopesize/exactnull.hpp"

#include <cmath>
#include <string>

#include "slopesize/error.hpp"

namespace slopesize {

namespace {

void require_n_at_least(std::int64_t n, std::int64_t minimum, const char* what) {
    if (n < minimum) {
        throw DomainError(std::string(what) + " needs n >= " + std::to_string(minimum) +
                          ", got " + std::to_string(n));
    }
}

double log_beta_half(std::int64_t n) {
    const double b = 0.5 * static_cast<double>(n - 1);
    return std::lgamma(0.5) + std::lgamma(b) - std::lgamma(0.5 + b);
}

}  // namespace

void ModelParams::validate() const {
    if (!(sigma_x > 0.0)) throw DomainError("sigma_x must be positive");
    if (!(sigma_eps > 0.0)) throw DomainError("sigma_eps must be positive");
    if (!std::isfinite(beta0) || !std::isfinite(beta1) || !std::isfinite(mu_x)) {
        throw DomainError("model parameters must be finite");
    }
}

EffectSize::EffectSize(double lambda) : lambda_(lambda) {
    if (!std::isfinite(lambda)) throw DomainError("effect size must be finite");
}

EffectSize EffectSize::from(const ModelParams& params) {
    params.validate();
    return EffectSize(params.beta1 * params.sigma_x / params.sigma_eps);
}

double sample_t2_null(Stream& stream, std::int64_t n) {
    require_n_at_least(n, 3, "sample_t2_null");
    const double w1 = stream.chisq(1);
    const double w2 = stream.chisq(n - 1);
    const double w3 = stream.chisq(n - 2);
    const double w4 = stream.chisq(n - 1);
    const double scale = static_cast<double>(n - 2) / static_cast<double>(n - 1);
    return scale * (w1 * w4) / (w2 * w3);
}

double sample_t2_null(const StreamKey& key, std::int64_t n) {
    require_n_at_least(n, 3, "sample_t2_null");
    Stream stream(key);
    return sample_t2_null(stream, n);
}

double beta1hat_density(double b, std::int64_t n, const ModelParams& params) {
    require_n_at_least(n, 2, "beta1hat_density");
    params.validate();
    const double ratio = params.sigma_x / params.sigma_eps;
    const double u = (b - params.beta1) * ratio;
    return ratio * scaled_slope_density(u, n);
}

double scaled_slope_density(double u, std::int64_t n) {
    require_n_at_least(n, 2, "scaled_slope_density");
    return std::exp(-log_beta_half(n) - 0.5 * static_cast<double>(n) * std::log1p(u * u));
}

SlopeMoments beta1hat_moments(std::int64_t n, const ModelParams& params) {
    params.validate();
    if (n <= 3) {
        throw UndefinedMoment("variance of the slope estimator is undefined for n <= 3 (got n = " +
                              std::to_string(n) + ")");
    }
    const double ratio = params.sigma_eps / params.sigma_x;
    return {params.beta1, ratio * ratio / static_cast<double>(n - 3)};
}

double scaled_t_transform(double beta1hat, std::int64_t n, const ModelParams& params) {
    require_n_at_least(n, 2, "scaled_t_transform");
    params.validate();
    return params.sigma_x / params.sigma_eps * (beta1hat - params.beta1) *
           std::sqrt(static_cast<double>(n - 1));
}

double expected_t2(std::int64_t n) {
    if (n <= 4) {
        throw UndefinedMoment("E(T^2) is undefined for n <= 4 (got n = " + std::to_string(n) + ")");
    }
    const auto nd = static_cast<double>(n);
    return (nd - 2.0) / ((nd - 3.0) * (nd - 4.0));
}

}  // namespace slopesize
