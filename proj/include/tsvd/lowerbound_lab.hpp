#pragma once

// Adversarial signals for the lower bounds, total-variation bounds between
// non-central chi-square laws, and Monte Carlo harnesses for the
// probabilistic lemmas behind them.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "tsvd/estimator.hpp"
#include "tsvd/sequence_model.hpp"

namespace tsvd {

struct AdversaryConditions {
    /// mu_bar_i = mu_i for i <= i0
    bool a = false;
    /// |B_{i0,lambda}^2(mu_bar) - B_{i0,lambda}^2(mu)| <= 0.05 sqrt(D - i0) / 2 delta^2
    bool b = false;
    /// B_{i0,lambda}(mu) + B_{i0,lambda}(mu_bar) >= 5.25 delta
    bool c = false;
};

struct AdversaryResult {
    Signal mu_bar;
    std::size_t i0 = 0;
    /// Present for the residual-filtration construction only.
    std::optional<AdversaryConditions> conditions_met;
    double predicted_floor = 0.0;
    /// B_{i0}^2(mu_bar)
    double bias_at_i0 = 0.0;
};

/// mu_bar = mu except mu_bar_{i0+1} = R_bar (i0+1)^{-alpha} / 2;
/// predicted floor B_{i0}^2(mu_bar) / 3.
AdversaryResult hide_signal(const Signal& mu, std::size_t i0, double alpha, double r_bar);

/// mu_bar = mu except mu_bar_{i0+1}^2 = mu_{i0+1}^2 + R_bar^2 (i0+1)^{-2 alpha} / 4;
/// predicted floor 0.05 B_{i0}^2(mu_bar).
AdversaryResult residual_adversary(const Signal& mu, const Spectrum& spectrum,
                                   const NoiseModel& noise, std::size_t i0, double alpha,
                                   double r_bar);

/// The three conditions as pure predicates of (mu, mu_bar).
AdversaryConditions adversary_conditions(const Signal& mu, const Signal& mu_bar,
                                         const Spectrum& spectrum, const NoiseModel& noise,
                                         std::size_t i0);

/// V_{i0+1} >= 200 risk_sq, the requirement on the reference signal.
bool residual_lower_bound_premise(const RiskProfile& profile, std::size_t i0, double risk_sq);

struct TvBoundResult {
    double bound_general = 0.0;
    std::optional<double> bound_simplified;
    std::optional<double> tv_numeric;
};

/// e (|a^2 - b^2| + sqrt(8/pi) |a - b|) / sqrt(pi K), and the simplified
/// 2 |a^2 - b^2| / sqrt(K) when a + b >= sqrt(8) e / (2 pi - sqrt(pi) e).
TvBoundResult tv_bound(double theta_norm, double theta_bar_norm, std::size_t k,
                       bool with_numeric = false);

/// sqrt(8) e / (2 pi - sqrt(pi) e), about 5.248
double tv_simplification_threshold();

/// Total variation between chi^2(K; a^2) and chi^2(K; b^2), to absolute
/// accuracy 1e-6. Throws AccuracyError when that cannot be certified.
double tv_numeric(double theta_norm, double theta_bar_norm, std::size_t k);

/// Density of the non-central chi^2(K; nc) law at x.
double noncentral_chi2_pdf(double x, std::size_t k, double noncentrality);

using StoppingRule = std::function<std::size_t(const Observation&)>;

struct RiskEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t replications = 0;
};

/// Monte Carlo estimate of E||mu_hat^(tau) - mu||^2.
RiskEstimate simulate_risk(const StoppingRule& rule, const Signal& mu, const Spectrum& spectrum,
                           const NoiseModel& noise, std::size_t replications, std::uint64_t seed);

struct Lemma23Report {
    std::size_t m = 0;
    double v_m = 0.0;
    double risk_sq = 0.0;
    double risk_se = 0.0;
    double prob_tau_ge_m = 0.0;
    double prob_se = 0.0;
    bool premise = false;
    /// P(tau >= m) <= 0.9 + 3 SE; meaningful only when the premise holds
    bool conclusion = false;
    /// !premise || conclusion
    bool implication_holds = false;
};

/// V_m >= 200 R(mu, tau)^2  =>  P(tau >= m) <= 0.9, checked by simulation.
Lemma23Report lemma23_check(const StoppingRule& rule, const Signal& mu, const Spectrum& spectrum,
                            const NoiseModel& noise, std::size_t m, std::size_t replications,
                            std::uint64_t seed);

/// log(delta^{-2}) / log(D) - p - 1/2
double adaptation_ceiling(std::size_t dimension, double delta, double p);

struct CounterexampleReport {
    bool feasible = false;
    std::string reason;
    double p = 0.0;
    std::size_t dimension = 0;
    double delta = 0.0;
    double mu_d = 0.0;
    double kappa = 0.0;
    double t_s = 0.0;
    double t_w = 0.0;
    double t_star = 0.0;
    double bias_t_star = 0.0;
    double bias_t_s = 0.0;
    double ratio = 0.0;
    /// ratio >= 4 up to relative rounding 1e-9
    bool verified = false;
};

/// lambda_i = i^{-p}, kappa = D delta^2, signal supported on the last
/// coordinate with mu_D^2 / 4 = V_{D-3/4}, so that t_s = D - 3/4. Feasible
/// when lambda_D^2 mu_D^2 <= delta^2 (D - 1); then B_{t*}^2 / B_{t_s}^2 = 4.
/// The scale is fixed by mu_D = 1.
CounterexampleReport counterexample_3_2(double p, std::size_t dimension);

/// Smallest D <= max_dimension for which the construction is feasible.
std::optional<std::size_t> counterexample_min_dimension(double p, std::size_t max_dimension);

struct TailCheck {
    double x = 0.0;
    double bound = 0.0;  // e^{-x}
    double lower_frequency = 0.0;
    double upper_frequency = 0.0;
    /// sqrt(e^{-x} (1 - e^{-x}) / n)
    double standard_error = 0.0;
    std::size_t draws = 0;
    bool lower_holds = false;
    bool upper_holds = false;
};

/// Empirical frequencies of
///   sum a_i (eps_i^2 - 1) < -2 ||a|| sqrt(x)
///   sum a_i (eps_i^2 - 1) >  2 ||a|| sqrt(x) + 2 max(a) x
/// against e^{-x} + 3 SE, for nonnegative weights a.
TailCheck chi_square_tail_check(std::span<const double> weights, double x, std::size_t draws,
                                std::uint64_t seed);

}  // namespace tsvd
