#pragma once

// Residual-based early stopping, the AIC selector and the two-step rule.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "tsvd/estimator.hpp"
#include "tsvd/oracles.hpp"
#include "tsvd/sequence_model.hpp"

namespace tsvd {

struct M0Mode {
    enum class Kind {
        explicit_value,
        zero,
        /// floor(q_level sqrt(2D)) + 1
        normal_quantile,
        /// floor(128 log(D) sqrt(D)) + 1, capped at D
        theory,
    };
    Kind kind = Kind::zero;
    double level = 0.99;
    std::size_t value = 0;

    static M0Mode explicit_index(std::size_t m0) { return {Kind::explicit_value, 0.99, m0}; }
    static M0Mode zero() { return {Kind::zero, 0.99, 0}; }
    static M0Mode normal_quantile(double level) { return {Kind::normal_quantile, level, 0}; }
    static M0Mode theory() { return {Kind::theory, 0.99, 0}; }

    /// Parses "zero", "theory", "normal_quantile" (level 0.99),
    /// "normal_quantile:<level>" or a plain integer.
    static M0Mode parse(const std::string& text);
    std::string to_string() const;
};

/// Throws InvalidArgument for an explicit m0 > D or a level outside (0, 1).
std::size_t resolve_m0(const M0Mode& mode, std::size_t dimension);

/// D delta^2 + drift sqrt(D) delta^2
double default_kappa(std::size_t dimension, double delta, double drift = 0.0);

struct StoppingConfig {
    double kappa = 0.0;
    std::size_t m0 = 0;
    M0Mode m0_mode = M0Mode::zero();
    /// Norm of the AIC criterion used by the two-step rule.
    Norm aic_norm = Norm::strong;
    /// Multiplier on the AIC penalty constant 2.
    double aic_penalty = 1.0;

    /// Resolves m0 from the mode; kappa defaults to D delta^2.
    static StoppingConfig make(std::size_t dimension, double delta, M0Mode mode,
                               std::optional<double> kappa = std::nullopt);
    void validate(std::size_t dimension) const;
};

struct StopOutcome {
    std::size_t tau = 0;
    std::optional<std::size_t> rho;
    std::size_t coefficients_consumed = 0;
    /// tau == m0
    bool immediate_stop = false;
    /// R_tau^2 as computed by the rule
    double residual_sq = 0.0;
};

struct Coefficient {
    std::size_t index;  // 1-based
    double value;
};

/// Sequential reader of Y_1, Y_2, ... with ||Y||^2 known up front.
class CoefficientSource {
public:
    virtual ~CoefficientSource() = default;
    virtual std::size_t dimension() const = 0;
    virtual double norm_sq() const = 0;
    /// The next coefficient, or nullopt once the stream is exhausted.
    virtual std::optional<Coefficient> next() = 0;
};

class ObservationSource final : public CoefficientSource {
public:
    explicit ObservationSource(const Observation& obs) : obs_(obs) {}
    std::size_t dimension() const override { return obs_.size(); }
    double norm_sq() const override { return obs_.y_norm_sq; }
    std::optional<Coefficient> next() override;
    std::size_t consumed() const noexcept { return position_; }

private:
    const Observation& obs_;
    std::size_t position_ = 0;
};

/// tau = min{m >= m0 : R_m^2 <= kappa}, reading exactly tau coefficients.
/// Throws TruncatedStream if the source ends before the rule stops.
StopOutcome early_stop(CoefficientSource& source, const StoppingConfig& config);
StopOutcome early_stop(const Observation& obs, const StoppingConfig& config);

/// argmin over m in {0..m0} of the AIC criterion, ties to the smallest m:
///   strong: sum_{i <= m} lambda_i^{-2} (2 c delta^2 - Y_i^2)
///   weak:   sum_{i <= m} (2 c delta^2 - Y_i^2)
/// with c the penalty multiplier. Only y[0..m0) and lambda[0..m0) are read.
std::size_t aic_select(std::span<const double> y, std::span<const double> lambda, double delta,
                       std::size_t m0, Norm norm, double penalty = 1.0);
std::size_t aic_select(const Observation& obs, const Spectrum& spectrum, const NoiseModel& noise,
                       std::size_t m0, Norm norm, double penalty = 1.0);

struct TwoStepResult {
    StopOutcome outcome;
    EstimateVector estimate;
};

/// rho = tau if tau > m0, else the AIC selection over {0..m0}.
TwoStepResult two_step(const Observation& obs, const Spectrum& spectrum, const NoiseModel& noise,
                       const StoppingConfig& config);

/// delta_hat = (R_{m1}^2 / (D - m1))^{1/2}
double estimate_noise_level(const Observation& obs, std::size_t m1);

}  // namespace tsvd
