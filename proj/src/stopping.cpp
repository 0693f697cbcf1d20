#include "tsvd/stopping.hpp"

#include <boost/math/distributions/normal.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "tsvd/error.hpp"
#include "tsvd/numeric.hpp"

namespace tsvd {

M0Mode M0Mode::parse(const std::string& text)
{
    if (text == "zero") {
        return zero();
    }
    if (text == "theory" || text == "theory_128logD") {
        return theory();
    }
    const std::string quantile = "normal_quantile";
    if (text.rfind(quantile, 0) == 0) {
        if (text.size() == quantile.size()) {
            return normal_quantile(0.99);
        }
        if (text[quantile.size()] != ':' && text[quantile.size()] != '(') {
            throw ConfigError("m0 mode: cannot parse '" + text + "'");
        }
        const std::string rest = text.substr(quantile.size() + 1);
        char* end = nullptr;
        const double level = std::strtod(rest.c_str(), &end);
        if (end == rest.c_str() || (*end != '\0' && *end != ')')) {
            throw ConfigError("m0 mode: cannot parse level in '" + text + "'");
        }
        return normal_quantile(level);
    }
    char* end = nullptr;
    const long long value = std::strtoll(text.c_str(), &end, 10);
    if (text.empty() || *end != '\0' || value < 0) {
        throw ConfigError("m0 mode: expected zero, theory, normal_quantile[:level] or an index");
    }
    return explicit_index(static_cast<std::size_t>(value));
}

std::string M0Mode::to_string() const
{
    switch (kind) {
    case Kind::zero:
        return "zero";
    case Kind::theory:
        return "theory";
    case Kind::normal_quantile: {
        char buf[64];
        std::snprintf(buf, sizeof buf, "normal_quantile:%.17g", level);
        return buf;
    }
    case Kind::explicit_value:
        break;
    }
    return std::to_string(value);
}

std::size_t resolve_m0(const M0Mode& mode, std::size_t dimension)
{
    const double d = static_cast<double>(dimension);
    switch (mode.kind) {
    case M0Mode::Kind::zero:
        return 0;
    case M0Mode::Kind::explicit_value:
        if (mode.value > dimension) {
            throw InvalidArgument("m0 exceeds the dimension");
        }
        return mode.value;
    case M0Mode::Kind::normal_quantile: {
        if (!(mode.level > 0.0 && mode.level < 1.0)) {
            throw InvalidArgument("normal quantile level must lie in (0, 1)");
        }
        const double q = boost::math::quantile(boost::math::normal(), mode.level);
        const double m0 = std::floor(q * std::sqrt(2.0 * d)) + 1.0;
        return static_cast<std::size_t>(std::clamp(m0, 0.0, d));
    }
    case M0Mode::Kind::theory: {
        const double m0 = std::floor(128.0 * std::log(d) * std::sqrt(d)) + 1.0;
        return static_cast<std::size_t>(std::min(m0, d));
    }
    }
    return 0;
}

double default_kappa(std::size_t dimension, double delta, double drift)
{
    const double d = static_cast<double>(dimension);
    return (d + drift * std::sqrt(d)) * delta * delta;
}

StoppingConfig StoppingConfig::make(std::size_t dimension, double delta, M0Mode mode,
                                    std::optional<double> kappa)
{
    StoppingConfig config;
    config.m0_mode = mode;
    config.m0 = resolve_m0(mode, dimension);
    config.kappa = kappa ? *kappa : default_kappa(dimension, delta);
    config.validate(dimension);
    return config;
}

void StoppingConfig::validate(std::size_t dimension) const
{
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
        throw InvalidArgument("kappa must be finite and non-negative");
    }
    if (m0 > dimension) {
        throw InvalidArgument("m0 exceeds the dimension");
    }
    if (!(aic_penalty >= 0.0) || !std::isfinite(aic_penalty)) {
        throw InvalidArgument("aic penalty multiplier must be finite and non-negative");
    }
}

std::optional<Coefficient> ObservationSource::next()
{
    if (position_ >= obs_.size()) {
        return std::nullopt;
    }
    const Coefficient c{position_ + 1, obs_.y[position_]};
    ++position_;
    return c;
}

StopOutcome early_stop(CoefficientSource& source, const StoppingConfig& config)
{
    const std::size_t d = source.dimension();
    config.validate(d);
    const double norm_sq = source.norm_sq();
    CompensatedSum explained;
    StopOutcome out;
    for (std::size_t m = 0;; ++m) {
        // R_D^2 = 0 by definition, whatever rounding left in the running sum
        const double residual = m == d ? 0.0 : norm_sq - explained.value();
        if (m >= config.m0 && residual <= config.kappa) {
            out.tau = m;
            out.residual_sq = residual;
            break;
        }
        const auto c = source.next();
        if (!c) {
            throw TruncatedStream("coefficient stream ended after " + std::to_string(m) +
                                  " of " + std::to_string(d) + " values");
        }
        explained.add(c->value * c->value);
        out.coefficients_consumed = m + 1;
    }
    out.immediate_stop = out.tau == config.m0;
    return out;
}

StopOutcome early_stop(const Observation& obs, const StoppingConfig& config)
{
    ObservationSource source(obs);
    return early_stop(source, config);
}

std::size_t aic_select(std::span<const double> y, std::span<const double> lambda, double delta,
                       std::size_t m0, Norm norm, double penalty)
{
    if (m0 > y.size() || (norm == Norm::strong && m0 > lambda.size())) {
        throw DimensionMismatch("aic_select: fewer than m0 coefficients available");
    }
    const double pen = 2.0 * penalty * delta * delta;
    CompensatedSum criterion;
    double best = 0.0;
    std::size_t best_m = 0;
    for (std::size_t i = 0; i < m0; ++i) {
        const double w = norm == Norm::strong ? 1.0 / (lambda[i] * lambda[i]) : 1.0;
        criterion.add(w * (pen - y[i] * y[i]));
        const double value = criterion.value();
        if (value < best) {
            best = value;
            best_m = i + 1;
        }
    }
    return best_m;
}

std::size_t aic_select(const Observation& obs, const Spectrum& spectrum, const NoiseModel& noise,
                       std::size_t m0, Norm norm, double penalty)
{
    if (obs.size() != spectrum.size()) {
        throw DimensionMismatch("aic_select: observation and spectrum lengths differ");
    }
    return aic_select(obs.y, spectrum.values(), noise.delta, m0, norm, penalty);
}

TwoStepResult two_step(const Observation& obs, const Spectrum& spectrum, const NoiseModel& noise,
                       const StoppingConfig& config)
{
    if (obs.size() != spectrum.size()) {
        throw DimensionMismatch("two_step: observation and spectrum lengths differ");
    }
    StopOutcome outcome = early_stop(obs, config);
    std::size_t rho = outcome.tau;
    if (outcome.tau <= config.m0) {
        rho = aic_select(obs, spectrum, noise, config.m0, config.aic_norm, config.aic_penalty);
    }
    outcome.rho = rho;
    EstimateVector estimate = estimate_at(obs, spectrum, TruncationIndex(static_cast<double>(rho)));
    return {outcome, std::move(estimate)};
}

double estimate_noise_level(const Observation& obs, std::size_t m1)
{
    const std::size_t d = obs.size();
    if (m1 >= d) {
        throw InvalidArgument("estimate_noise_level: burn-in must be below the dimension");
    }
    CompensatedSum tail;
    for (std::size_t i = d; i-- > m1;) {
        tail.add(obs.y[i] * obs.y[i]);
    }
    return std::sqrt(tail.value() / static_cast<double>(d - m1));
}

}  // namespace tsvd
