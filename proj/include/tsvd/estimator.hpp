#pragma once

// Continuously interpolated truncated-SVD (spectral cut-off) estimators.
//
// For a real truncation index t in [0, D] write k = floor(t), f = t - k.
// The estimator keeps coordinates 1..k in full and coordinate k+1 with
// amplitude weight sqrt(f), so that the weak variance is exactly t delta^2:
//
//     mu_hat_i = (1(i <= k) + sqrt(f) 1(i = k+1)) Y_i / lambda_i.
//
// Residual and bias carry the complementary weight (1 - sqrt(f))^2 on
// coordinate k+1; variances carry the linear weight f.

#include <cstddef>
#include <span>
#include <vector>

#include "tsvd/sequence_model.hpp"

namespace tsvd {

class TruncationIndex {
public:
    /// Throws InvalidArgument if t is negative or not finite.
    explicit TruncationIndex(double t);

    double value() const noexcept { return t_; }
    /// floor(t)
    std::size_t whole() const noexcept { return whole_; }
    /// t - floor(t), in [0, 1)
    double fraction() const noexcept { return t_ - static_cast<double>(whole_); }

    /// Throws InvalidArgument unless t <= dimension.
    void check(std::size_t dimension) const;

private:
    double t_;
    std::size_t whole_;
};

struct EstimateVector {
    std::vector<double> mu_hat;
    TruncationIndex t{0.0};
};

EstimateVector estimate_at(const Observation& obs, const Spectrum& spectrum, TruncationIndex t);

/// R_t^2 = (1 - sqrt(f))^2 Y_{k+1}^2 + sum_{i >= k+2} Y_i^2.
double residual_sq(const Observation& obs, TruncationIndex t);

/// B_t^2(mu), the strong bias.
double strong_bias_sq(const Signal& signal, TruncationIndex t);

/// B_{t,lambda}^2(mu): strong bias of (lambda_i mu_i).
double weak_bias_sq(const Signal& signal, const Spectrum& spectrum, TruncationIndex t);

/// V_t = delta^2 (sum_{i <= k} lambda_i^{-2} + f lambda_{k+1}^{-2}).
double strong_variance(const Spectrum& spectrum, const NoiseModel& noise, TruncationIndex t);

/// V_{t,lambda} = t delta^2.
double weak_variance(const NoiseModel& noise, TruncationIndex t);

/// S_t, the realized stochastic error; requires the retained noise draw.
double stochastic_error(const Observation& obs, const Spectrum& spectrum, TruncationIndex t);

/// E[R_t^2] = B_{t,lambda}^2 + ((1 - sqrt(f))^2 + D - k - 1) delta^2.
double expected_residual(const Signal& signal, const Spectrum& spectrum, const NoiseModel& noise,
                         TruncationIndex t);

/// ||mu_hat - mu||^2
double squared_error(const EstimateVector& estimate, const Signal& signal);

/// ||mu_hat - mu||_lambda^2
double weak_squared_error(const EstimateVector& estimate, const Signal& signal,
                          const Spectrum& spectrum);

/// Bias, variance and expected-residual functionals of one (signal, spectrum,
/// noise) triple, backed by tail and prefix sums built once in O(D). Every
/// query is O(1); the oracle searches evaluate these many times.
class RiskProfile {
public:
    RiskProfile(const Signal& signal, const Spectrum& spectrum, const NoiseModel& noise);

    std::size_t dimension() const noexcept { return dimension_; }
    double delta() const noexcept { return delta_; }

    double strong_bias_sq(double t) const;
    double weak_bias_sq(double t) const;
    double strong_variance(double t) const;
    double weak_variance(double t) const;
    double expected_residual(double t) const;
    /// E||mu_hat^(t) - mu||^2 = B_t^2 + V_t
    double strong_risk(double t) const { return strong_bias_sq(t) + strong_variance(t); }
    double weak_risk(double t) const { return weak_bias_sq(t) + weak_variance(t); }

    /// lambda_i^{-2} for 1-based i, clamped to i <= D.
    double inv_lambda_sq(std::size_t i) const;
    /// max_{i >= first} |lambda_i mu_i| for 1-based first; 0 when first > D.
    double max_weak_coefficient_from(std::size_t first) const;

private:
    struct Split {
        std::size_t whole;
        double fraction;
    };
    Split split(double t) const;

    std::size_t dimension_;
    double delta_;
    std::vector<double> mu_sq_;           // mu_i^2
    std::vector<double> weak_mu_sq_;      // lambda_i^2 mu_i^2
    std::vector<double> inv_lambda_sq_;   // lambda_i^{-2}
    std::vector<double> tail_mu_sq_;      // [m] = sum_{i > m} mu_i^2, m = 0..D
    std::vector<double> tail_weak_mu_sq_; // [m] = sum_{i > m} lambda_i^2 mu_i^2
    std::vector<double> prefix_inv_lambda_sq_;  // [m] = sum_{i <= m} lambda_i^{-2}
    std::vector<double> suffix_max_weak_;       // [m] = max_{i > m} |lambda_i mu_i|
};

}  // namespace tsvd
