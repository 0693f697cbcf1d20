#include "tsvd/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "tsvd/error.hpp"
#include "tsvd/numeric.hpp"

namespace tsvd {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what)
{
    if (a != b) {
        throw DimensionMismatch(std::string(what) + ": dimension mismatch");
    }
}

/// (1 - sqrt(f))^2 x_{k+1}^2 + sum_{i >= k+2} x_i^2 over 0-based values.
template <typename Value>
double interpolated_tail(std::size_t d, TruncationIndex t, Value value)
{
    t.check(d);
    const std::size_t k = t.whole();
    if (k >= d) {
        return 0.0;
    }
    CompensatedSum s;
    for (std::size_t i = d; i-- > k + 1;) {
        const double x = value(i);
        s.add(x * x);
    }
    const double w = 1.0 - std::sqrt(t.fraction());
    const double x = value(k);
    s.add(w * w * x * x);
    return s.value();
}

}  // namespace

TruncationIndex::TruncationIndex(double t) : t_(t), whole_(0)
{
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw InvalidArgument("truncation index must be finite and non-negative");
    }
    whole_ = static_cast<std::size_t>(std::floor(t));
}

void TruncationIndex::check(std::size_t dimension) const
{
    if (t_ > static_cast<double>(dimension)) {
        throw InvalidArgument("truncation index exceeds the dimension");
    }
}

EstimateVector estimate_at(const Observation& obs, const Spectrum& spectrum, TruncationIndex t)
{
    require_same_size(obs.size(), spectrum.size(), "estimate_at");
    const std::size_t d = obs.size();
    t.check(d);
    EstimateVector est{std::vector<double>(d, 0.0), t};
    const std::size_t k = t.whole();
    for (std::size_t i = 0; i < std::min(k, d); ++i) {
        est.mu_hat[i] = obs.y[i] / spectrum[i];
    }
    if (k < d && t.fraction() > 0.0) {
        est.mu_hat[k] = std::sqrt(t.fraction()) * obs.y[k] / spectrum[k];
    }
    return est;
}

double residual_sq(const Observation& obs, TruncationIndex t)
{
    return interpolated_tail(obs.size(), t, [&](std::size_t i) { return obs.y[i]; });
}

double strong_bias_sq(const Signal& signal, TruncationIndex t)
{
    return interpolated_tail(signal.size(), t, [&](std::size_t i) { return signal[i]; });
}

double weak_bias_sq(const Signal& signal, const Spectrum& spectrum, TruncationIndex t)
{
    require_same_size(signal.size(), spectrum.size(), "weak_bias_sq");
    return interpolated_tail(signal.size(), t,
                             [&](std::size_t i) { return spectrum[i] * signal[i]; });
}

double strong_variance(const Spectrum& spectrum, const NoiseModel& noise, TruncationIndex t)
{
    const std::size_t d = spectrum.size();
    t.check(d);
    const std::size_t k = t.whole();
    CompensatedSum s;
    for (std::size_t i = 0; i < std::min(k, d); ++i) {
        s.add(1.0 / (spectrum[i] * spectrum[i]));
    }
    if (k < d) {
        s.add(t.fraction() / (spectrum[k] * spectrum[k]));
    }
    return noise.delta * noise.delta * s.value();
}

double weak_variance(const NoiseModel& noise, TruncationIndex t)
{
    return t.value() * noise.delta * noise.delta;
}

double stochastic_error(const Observation& obs, const Spectrum& spectrum, TruncationIndex t)
{
    if (!obs.noise) {
        throw MissingNoise("stochastic_error: observation carries no noise draw");
    }
    const auto& eps = *obs.noise;
    require_same_size(eps.size(), spectrum.size(), "stochastic_error");
    const std::size_t d = spectrum.size();
    t.check(d);
    const std::size_t k = t.whole();
    CompensatedSum s;
    for (std::size_t i = 0; i < std::min(k, d); ++i) {
        const double e = eps[i] / spectrum[i];
        s.add(e * e);
    }
    if (k < d) {
        const double e = eps[k] / spectrum[k];
        s.add(t.fraction() * e * e);
    }
    return obs.delta * obs.delta * s.value();
}

double expected_residual(const Signal& signal, const Spectrum& spectrum, const NoiseModel& noise,
                         TruncationIndex t)
{
    const std::size_t d = spectrum.size();
    const double bias = weak_bias_sq(signal, spectrum, t);
    const std::size_t k = t.whole();
    if (k >= d) {
        return bias;
    }
    const double w = 1.0 - std::sqrt(t.fraction());
    const double count = w * w + static_cast<double>(d - k - 1);
    return bias + count * noise.delta * noise.delta;
}

double squared_error(const EstimateVector& estimate, const Signal& signal)
{
    require_same_size(estimate.mu_hat.size(), signal.size(), "squared_error");
    CompensatedSum s;
    for (std::size_t i = 0; i < signal.size(); ++i) {
        const double e = estimate.mu_hat[i] - signal[i];
        s.add(e * e);
    }
    return s.value();
}

double weak_squared_error(const EstimateVector& estimate, const Signal& signal,
                          const Spectrum& spectrum)
{
    require_same_size(estimate.mu_hat.size(), signal.size(), "weak_squared_error");
    require_same_size(spectrum.size(), signal.size(), "weak_squared_error");
    CompensatedSum s;
    for (std::size_t i = 0; i < signal.size(); ++i) {
        const double e = spectrum[i] * (estimate.mu_hat[i] - signal[i]);
        s.add(e * e);
    }
    return s.value();
}

// ---------------------------------------------------------------------------

RiskProfile::RiskProfile(const Signal& signal, const Spectrum& spectrum, const NoiseModel& noise)
    : dimension_(spectrum.size()), delta_(noise.delta)
{
    require_same_size(signal.size(), spectrum.size(), "RiskProfile");
    noise.validate();
    const std::size_t d = dimension_;
    mu_sq_.resize(d);
    weak_mu_sq_.resize(d);
    inv_lambda_sq_.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        mu_sq_[i] = signal[i] * signal[i];
        const double w = spectrum[i] * signal[i];
        weak_mu_sq_[i] = w * w;
        inv_lambda_sq_[i] = 1.0 / (spectrum[i] * spectrum[i]);
    }

    // tails are accumulated from the end, smallest terms first
    tail_mu_sq_.assign(d + 1, 0.0);
    tail_weak_mu_sq_.assign(d + 1, 0.0);
    suffix_max_weak_.assign(d + 1, 0.0);
    CompensatedSum strong_tail;
    CompensatedSum weak_tail;
    double running_max = 0.0;
    for (std::size_t m = d; m-- > 0;) {
        strong_tail.add(mu_sq_[m]);
        weak_tail.add(weak_mu_sq_[m]);
        running_max = std::max(running_max, std::sqrt(weak_mu_sq_[m]));
        tail_mu_sq_[m] = strong_tail.value();
        tail_weak_mu_sq_[m] = weak_tail.value();
        suffix_max_weak_[m] = running_max;
    }

    prefix_inv_lambda_sq_.assign(d + 1, 0.0);
    CompensatedSum prefix;
    for (std::size_t m = 0; m < d; ++m) {
        prefix.add(inv_lambda_sq_[m]);
        prefix_inv_lambda_sq_[m + 1] = prefix.value();
    }
}

RiskProfile::Split RiskProfile::split(double t) const
{
    TruncationIndex index(t);
    index.check(dimension_);
    return {index.whole(), index.fraction()};
}

double RiskProfile::strong_bias_sq(double t) const
{
    const auto [k, f] = split(t);
    if (k >= dimension_) {
        return 0.0;
    }
    const double w = 1.0 - std::sqrt(f);
    return w * w * mu_sq_[k] + tail_mu_sq_[k + 1];
}

double RiskProfile::weak_bias_sq(double t) const
{
    const auto [k, f] = split(t);
    if (k >= dimension_) {
        return 0.0;
    }
    const double w = 1.0 - std::sqrt(f);
    return w * w * weak_mu_sq_[k] + tail_weak_mu_sq_[k + 1];
}

double RiskProfile::strong_variance(double t) const
{
    const auto [k, f] = split(t);
    double sum = prefix_inv_lambda_sq_[k];
    if (k < dimension_) {
        sum += f * inv_lambda_sq_[k];
    }
    return delta_ * delta_ * sum;
}

double RiskProfile::weak_variance(double t) const
{
    split(t);
    return t * delta_ * delta_;
}

double RiskProfile::expected_residual(double t) const
{
    const auto [k, f] = split(t);
    if (k >= dimension_) {
        return 0.0;
    }
    const double w = 1.0 - std::sqrt(f);
    return weak_bias_sq(t) + (w * w + static_cast<double>(dimension_ - k - 1)) * delta_ * delta_;
}

double RiskProfile::inv_lambda_sq(std::size_t i) const
{
    if (i == 0) {
        throw InvalidArgument("inv_lambda_sq: indices are 1-based");
    }
    return inv_lambda_sq_[std::min(i, dimension_) - 1];
}

double RiskProfile::max_weak_coefficient_from(std::size_t first) const
{
    if (first == 0) {
        first = 1;
    }
    if (first > dimension_) {
        return 0.0;
    }
    return suffix_max_weak_[first - 1];
}

}  // namespace tsvd
