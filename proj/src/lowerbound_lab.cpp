#include "tsvd/lowerbound_lab.hpp"

#include <algorithm>
#include <array>
#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <vector>

#include "tsvd/error.hpp"
#include "tsvd/numeric.hpp"
#include "tsvd/oracles.hpp"
#include "tsvd/rng.hpp"

namespace tsvd {

namespace {

constexpr double pi = boost::math::constants::pi<double>();
constexpr double euler_e = boost::math::constants::e<double>();

void check_i0(std::size_t i0, std::size_t d)
{
    if (i0 < 1 || i0 + 1 > d) {
        throw InvalidArgument("i0 must satisfy 1 <= i0 <= D - 1");
    }
}

void check_hiding_parameters(double alpha, double r_bar)
{
    if (!(alpha >= 0.0)) {
        throw InvalidArgument("alpha must be non-negative");
    }
    if (!(r_bar > 0.0) || !std::isfinite(r_bar)) {
        throw InvalidArgument("R_bar must be positive and finite");
    }
}

double tail_sq(const Signal& mu, std::size_t from)
{
    CompensatedSum s;
    for (std::size_t i = mu.size(); i-- > from;) {
        s.add(mu[i] * mu[i]);
    }
    return s.value();
}

double weak_tail_sq(const Signal& mu, const Spectrum& spectrum, std::size_t from)
{
    CompensatedSum s;
    for (std::size_t i = mu.size(); i-- > from;) {
        const double w = spectrum[i] * mu[i];
        s.add(w * w);
    }
    return s.value();
}

// --- non-central chi-square densities -------------------------------------

/// Poisson-mixture terms that carry all but ~1e-12 of the weight.
std::size_t mixture_terms(double noncentrality)
{
    if (noncentrality <= 0.0) {
        return 1;
    }
    const double half = 0.5 * noncentrality;
    return static_cast<std::size_t>(half + 12.0 * std::sqrt(half) + 40.0);
}

/// log of the density of U = sqrt(X), X ~ chi^2(K; nc): 2u f_X(u^2).
double log_root_density(double u, std::size_t k, double nc)
{
    const double half = 0.5 * nc;
    const double log_half = half > 0.0 ? std::log(half) : 0.0;
    const double log_u = u > 0.0 ? std::log(u) : -std::numeric_limits<double>::infinity();
    const std::size_t terms = mixture_terms(nc);
    double peak = -std::numeric_limits<double>::infinity();
    std::vector<double> logs(terms);
    for (std::size_t j = 0; j < terms; ++j) {
        const double dof = static_cast<double>(k + 2 * j);
        const double log_weight =
            -half + static_cast<double>(j) * log_half - std::lgamma(static_cast<double>(j) + 1.0);
        const double power = dof - 1.0 == 0.0 ? 0.0 : (dof - 1.0) * log_u;
        logs[j] = log_weight + std::log(2.0) + power - 0.5 * u * u -
                  0.5 * dof * std::log(2.0) - std::lgamma(0.5 * dof);
        peak = std::max(peak, logs[j]);
    }
    if (!std::isfinite(peak)) {
        return peak;
    }
    CompensatedSum s;
    for (double l : logs) {
        s.add(std::exp(l - peak));
    }
    return peak + std::log(s.value());
}

double root_density(double u, std::size_t k, double nc)
{
    return std::exp(log_root_density(u, k, nc));
}

struct TvIntegral {
    double tv;
    double error;
};

/// Composite 20-point Gauss-Legendre of fn over [a, b] with n panels.
template <typename Fn>
double composite_gauss(const Fn& fn, double a, double b, std::size_t panels)
{
    const double h = (b - a) / static_cast<double>(panels);
    CompensatedSum s;
    for (std::size_t i = 0; i < panels; ++i) {
        const double lo = a + h * static_cast<double>(i);
        s.add(boost::math::quadrature::gauss<double, 20>::integrate(fn, lo, lo + h));
    }
    return s.value();
}

}  // namespace

// ---------------------------------------------------------------------------

AdversaryResult hide_signal(const Signal& mu, std::size_t i0, double alpha, double r_bar)
{
    check_i0(i0, mu.size());
    check_hiding_parameters(alpha, r_bar);
    std::vector<double> bar(mu.coefficients().begin(), mu.coefficients().end());
    bar[i0] = 0.5 * r_bar * std::pow(static_cast<double>(i0 + 1), -alpha);
    AdversaryResult out;
    out.mu_bar = Signal(std::move(bar));
    out.i0 = i0;
    out.bias_at_i0 = tail_sq(out.mu_bar, i0);
    out.predicted_floor = out.bias_at_i0 / 3.0;
    return out;
}

AdversaryConditions adversary_conditions(const Signal& mu, const Signal& mu_bar,
                                         const Spectrum& spectrum, const NoiseModel& noise,
                                         std::size_t i0)
{
    const std::size_t d = spectrum.size();
    if (mu.size() != d || mu_bar.size() != d) {
        throw DimensionMismatch("adversary_conditions: lengths differ");
    }
    check_i0(i0, d);
    AdversaryConditions c;
    c.a = true;
    for (std::size_t i = 0; i < i0; ++i) {
        if (mu[i] != mu_bar[i]) {
            c.a = false;
        }
    }
    const double delta_sq = noise.delta * noise.delta;
    const double weak = weak_tail_sq(mu, spectrum, i0);
    const double weak_bar = weak_tail_sq(mu_bar, spectrum, i0);
    c.b = std::abs(weak_bar - weak) <=
          0.05 * (std::sqrt(static_cast<double>(d - i0)) / 2.0) * delta_sq;
    c.c = std::sqrt(weak) + std::sqrt(weak_bar) >= 5.25 * noise.delta;
    return c;
}

AdversaryResult residual_adversary(const Signal& mu, const Spectrum& spectrum,
                                   const NoiseModel& noise, std::size_t i0, double alpha,
                                   double r_bar)
{
    if (mu.size() != spectrum.size()) {
        throw DimensionMismatch("residual_adversary: signal and spectrum lengths differ");
    }
    check_i0(i0, mu.size());
    check_hiding_parameters(alpha, r_bar);
    noise.validate();
    std::vector<double> bar(mu.coefficients().begin(), mu.coefficients().end());
    const double bump = 0.25 * r_bar * r_bar * std::pow(static_cast<double>(i0 + 1), -2.0 * alpha);
    const double magnitude = std::sqrt(mu[i0] * mu[i0] + bump);
    bar[i0] = mu[i0] < 0.0 ? -magnitude : magnitude;
    AdversaryResult out;
    out.mu_bar = Signal(std::move(bar));
    out.i0 = i0;
    out.conditions_met = adversary_conditions(mu, out.mu_bar, spectrum, noise, i0);
    out.bias_at_i0 = tail_sq(out.mu_bar, i0);
    out.predicted_floor = 0.05 * out.bias_at_i0;
    return out;
}

bool residual_lower_bound_premise(const RiskProfile& profile, std::size_t i0, double risk_sq)
{
    if (i0 + 1 > profile.dimension()) {
        throw InvalidArgument("residual_lower_bound_premise: i0 + 1 exceeds the dimension");
    }
    return profile.strong_variance(static_cast<double>(i0 + 1)) >= 200.0 * risk_sq;
}

// ---------------------------------------------------------------------------

double tv_simplification_threshold()
{
    return std::sqrt(8.0) * euler_e / (2.0 * pi - std::sqrt(pi) * euler_e);
}

TvBoundResult tv_bound(double theta_norm, double theta_bar_norm, std::size_t k, bool with_numeric)
{
    if (k == 0) {
        throw InvalidArgument("tv_bound: K must be at least 1");
    }
    if (!(theta_norm >= 0.0) || !(theta_bar_norm >= 0.0)) {
        throw InvalidArgument("tv_bound: norms must be non-negative");
    }
    const double kk = static_cast<double>(k);
    const double sq_gap = std::abs(theta_norm * theta_norm - theta_bar_norm * theta_bar_norm);
    const double gap = std::abs(theta_norm - theta_bar_norm);
    TvBoundResult out;
    out.bound_general = euler_e * (sq_gap + std::sqrt(8.0 / pi) * gap) / std::sqrt(pi * kk);
    if (theta_norm + theta_bar_norm >= tv_simplification_threshold()) {
        out.bound_simplified = 2.0 * sq_gap / std::sqrt(kk);
    }
    if (with_numeric) {
        out.tv_numeric = tv_numeric(theta_norm, theta_bar_norm, k);
    }
    return out;
}

double noncentral_chi2_pdf(double x, std::size_t k, double noncentrality)
{
    if (k == 0 || !(noncentrality >= 0.0)) {
        throw InvalidArgument("noncentral_chi2_pdf: need K >= 1 and a non-negative noncentrality");
    }
    if (x < 0.0) {
        return 0.0;
    }
    if (x == 0.0) {
        if (k == 1) {
            return std::numeric_limits<double>::infinity();
        }
        return k == 2 ? 0.5 * std::exp(-0.5 * noncentrality) : 0.0;
    }
    const double u = std::sqrt(x);
    return root_density(u, k, noncentrality) / (2.0 * u);
}

double tv_numeric(double theta_norm, double theta_bar_norm, std::size_t k)
{
    if (k == 0) {
        throw InvalidArgument("tv_numeric: K must be at least 1");
    }
    if (!(theta_norm >= 0.0) || !(theta_bar_norm >= 0.0) || !std::isfinite(theta_norm) ||
        !std::isfinite(theta_bar_norm)) {
        throw InvalidArgument("tv_numeric: norms must be finite and non-negative");
    }
    if (theta_norm == theta_bar_norm) {
        return 0.0;
    }
    const double nc_a = theta_norm * theta_norm;
    const double nc_b = theta_bar_norm * theta_bar_norm;
    const double kk = static_cast<double>(k);
    const double nc_max = std::max(nc_a, nc_b);

    // integrate in u = sqrt(x), where both densities are bounded
    const double x_max = kk + nc_max + 20.0 * std::sqrt(2.0 * (kk + 2.0 * nc_max)) + 60.0;
    const double u_max = std::sqrt(x_max);
    auto f = [&](double u) { return root_density(u, k, nc_a); };
    auto g = [&](double u) { return root_density(u, k, nc_b); };
    auto h = [&](double u) { return f(u) - g(u); };

    // bracket the sign changes of f - g and refine them
    constexpr std::size_t grid = 4000;
    std::vector<double> breaks{0.0};
    double prev_u = 0.0;
    double prev_sign = 0.0;
    for (std::size_t i = 0; i <= grid; ++i) {
        const double u = u_max * static_cast<double>(i) / static_cast<double>(grid);
        const double v = h(u);
        const double sign = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
        if (sign != 0.0) {
            if (prev_sign != 0.0 && sign != prev_sign) {
                double lo = prev_u;
                double hi = u;
                for (int it = 0; it < 200 && hi - lo > 1e-15 * u_max; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double hm = h(mid);
                    if ((hm > 0.0 ? 1.0 : -1.0) == prev_sign) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                breaks.push_back(0.5 * (lo + hi));
            }
            prev_sign = sign;
            prev_u = u;
        }
    }
    breaks.push_back(u_max);

    auto integrate = [&](std::size_t panels) {
        CompensatedSum abs_diff;
        CompensatedSum mass_f;
        CompensatedSum mass_g;
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
            const double a = breaks[i];
            const double b = breaks[i + 1];
            const double fa = composite_gauss(f, a, b, panels);
            const double ga = composite_gauss(g, a, b, panels);
            abs_diff.add(std::abs(fa - ga));
            mass_f.add(fa);
            mass_g.add(ga);
        }
        return std::array<double, 3>{abs_diff.value(), mass_f.value(), mass_g.value()};
    };

    constexpr double target = 1e-6;
    auto coarse = integrate(8);
    double estimate = 0.5 * coarse[0];
    double achieved = std::numeric_limits<double>::infinity();
    for (std::size_t panels = 16; panels <= 8192; panels *= 2) {
        const auto fine = integrate(panels);
        estimate = 0.5 * fine[0];
        // quadrature change plus the mass beyond u_max of both laws
        achieved = 0.5 * std::abs(fine[0] - coarse[0]) + std::abs(1.0 - fine[1]) +
                   std::abs(1.0 - fine[2]);
        if (achieved <= 0.1 * target) {
            break;
        }
        coarse = fine;
    }
    estimate = std::clamp(estimate, 0.0, 1.0);
    if (!(achieved <= target)) {
        throw AccuracyError("tv_numeric: could not certify 1e-6 accuracy", estimate, achieved);
    }
    return estimate;
}

// ---------------------------------------------------------------------------

RiskEstimate simulate_risk(const StoppingRule& rule, const Signal& mu, const Spectrum& spectrum,
                           const NoiseModel& noise, std::size_t replications, std::uint64_t seed)
{
    if (replications < 2) {
        throw InvalidArgument("simulate_risk: need at least two replications");
    }
    CompensatedSum sum;
    CompensatedSum sum_sq;
    for (std::size_t r = 0; r < replications; ++r) {
        const Observation obs = simulate_observation(mu, spectrum, noise, derive_seed(seed, r));
        const std::size_t tau = rule(obs);
        const double err =
            squared_error(estimate_at(obs, spectrum, TruncationIndex(static_cast<double>(tau))), mu);
        sum.add(err);
        sum_sq.add(err * err);
    }
    const double n = static_cast<double>(replications);
    const double mean = sum.value() / n;
    const double var = std::max(0.0, (sum_sq.value() - n * mean * mean) / (n - 1.0));
    return {mean, std::sqrt(var / n), replications};
}

Lemma23Report lemma23_check(const StoppingRule& rule, const Signal& mu, const Spectrum& spectrum,
                            const NoiseModel& noise, std::size_t m, std::size_t replications,
                            std::uint64_t seed)
{
    if (m < 1 || m > spectrum.size()) {
        throw InvalidArgument("lemma23_check: m must lie in 1..D");
    }
    if (replications < 2) {
        throw InvalidArgument("lemma23_check: need at least two replications");
    }
    CompensatedSum sum;
    CompensatedSum sum_sq;
    std::size_t late = 0;
    for (std::size_t r = 0; r < replications; ++r) {
        const Observation obs = simulate_observation(mu, spectrum, noise, derive_seed(seed, r));
        const std::size_t tau = rule(obs);
        if (tau > spectrum.size()) {
            throw InvalidArgument("lemma23_check: rule returned an index above D");
        }
        const double err =
            squared_error(estimate_at(obs, spectrum, TruncationIndex(static_cast<double>(tau))), mu);
        sum.add(err);
        sum_sq.add(err * err);
        if (tau >= m) {
            ++late;
        }
    }
    const double n = static_cast<double>(replications);
    Lemma23Report rep;
    rep.m = m;
    rep.v_m = strong_variance(spectrum, noise, TruncationIndex(static_cast<double>(m)));
    rep.risk_sq = sum.value() / n;
    const double var = std::max(0.0, (sum_sq.value() - n * rep.risk_sq * rep.risk_sq) / (n - 1.0));
    rep.risk_se = std::sqrt(var / n);
    rep.prob_tau_ge_m = static_cast<double>(late) / n;
    rep.prob_se = std::sqrt(rep.prob_tau_ge_m * (1.0 - rep.prob_tau_ge_m) / n);
    rep.premise = rep.v_m >= 200.0 * rep.risk_sq;
    rep.conclusion = rep.prob_tau_ge_m <= 0.9 + 3.0 * rep.prob_se;
    rep.implication_holds = !rep.premise || rep.conclusion;
    return rep;
}

double adaptation_ceiling(std::size_t dimension, double delta, double p)
{
    if (dimension <= 1) {
        throw InvalidArgument("adaptation_ceiling: D must exceed 1");
    }
    if (!(delta > 0.0)) {
        throw InvalidArgument("adaptation_ceiling: delta must be positive");
    }
    return std::log(1.0 / (delta * delta)) / std::log(static_cast<double>(dimension)) - p - 0.5;
}

// ---------------------------------------------------------------------------

namespace {

/// sum_{i < D} i^{2p} + D^{2p} / 4, i.e. V_{D-3/4} / delta^2
double counterexample_variance_units(double p, std::size_t d)
{
    CompensatedSum s;
    for (std::size_t i = 1; i < d; ++i) {
        s.add(std::pow(static_cast<double>(i), 2.0 * p));
    }
    s.add(0.25 * std::pow(static_cast<double>(d), 2.0 * p));
    return s.value();
}

bool counterexample_feasible(double p, std::size_t d)
{
    // with mu_D = 1: delta^2 = 1 / (4 S); need D^{-2p} <= delta^2 (D - 1)
    const double s = counterexample_variance_units(p, d);
    return std::pow(static_cast<double>(d), -2.0 * p) * 4.0 * s <= static_cast<double>(d - 1);
}

}  // namespace

CounterexampleReport counterexample_3_2(double p, std::size_t dimension)
{
    CounterexampleReport rep;
    rep.p = p;
    rep.dimension = dimension;
    if (!(p > 1.5)) {
        rep.reason = "the construction needs p > 3/2";
        return rep;
    }
    if (dimension < 2) {
        rep.reason = "the construction needs D >= 2";
        return rep;
    }
    if (!counterexample_feasible(p, dimension)) {
        rep.reason = "D too small: lambda_D^2 mu_D^2 > delta^2 (D - 1)";
        return rep;
    }
    const double s = counterexample_variance_units(p, dimension);
    rep.mu_d = 1.0;
    rep.delta = 1.0 / (2.0 * std::sqrt(s));
    rep.kappa = static_cast<double>(dimension) * rep.delta * rep.delta;

    std::vector<double> coeffs(dimension, 0.0);
    coeffs.back() = rep.mu_d;
    const Signal mu(std::move(coeffs));
    const Spectrum spectrum = make_polynomial_spectrum(dimension, p);
    const RiskProfile profile(mu, spectrum, NoiseModel{rep.delta, NoiseKind::gaussian});
    rep.t_s = balanced_continuous(profile, 0, Norm::strong);
    rep.t_w = balanced_continuous(profile, 0, Norm::weak);
    rep.t_star = oracle_proxy(profile, rep.kappa, 0);
    rep.bias_t_star = profile.strong_bias_sq(rep.t_star);
    rep.bias_t_s = profile.strong_bias_sq(rep.t_s);
    rep.ratio = rep.bias_t_s > 0.0 ? rep.bias_t_star / rep.bias_t_s
                                   : std::numeric_limits<double>::infinity();
    rep.feasible = true;
    rep.verified = rep.ratio >= 4.0 * (1.0 - 1e-9);
    return rep;
}

std::optional<std::size_t> counterexample_min_dimension(double p, std::size_t max_dimension)
{
    if (!(p > 1.5)) {
        return std::nullopt;
    }
    for (std::size_t d = 2; d <= max_dimension; ++d) {
        if (counterexample_feasible(p, d)) {
            return d;
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------

TailCheck chi_square_tail_check(std::span<const double> weights, double x, std::size_t draws,
                                std::uint64_t seed)
{
    if (weights.empty()) {
        throw InvalidArgument("chi_square_tail_check: weights must be non-empty");
    }
    if (!(x > 0.0)) {
        throw InvalidArgument("chi_square_tail_check: x must be positive");
    }
    if (draws == 0) {
        throw InvalidArgument("chi_square_tail_check: need at least one draw");
    }
    double max_a = 0.0;
    for (double a : weights) {
        if (!(a >= 0.0)) {
            throw InvalidArgument("chi_square_tail_check: weights must be non-negative");
        }
        max_a = std::max(max_a, a);
    }
    const double norm_a = std::sqrt(sum_of_squares(weights));
    const double lower = -2.0 * norm_a * std::sqrt(x);
    const double upper = 2.0 * norm_a * std::sqrt(x) + 2.0 * max_a * x;

    RandomStream rng(seed);
    std::size_t below = 0;
    std::size_t above = 0;
    for (std::size_t r = 0; r < draws; ++r) {
        double z = 0.0;
        for (double a : weights) {
            const double e = rng.gaussian();
            z += a * (e * e - 1.0);
        }
        below += z < lower ? 1 : 0;
        above += z > upper ? 1 : 0;
    }
    TailCheck out;
    out.x = x;
    out.draws = draws;
    out.bound = std::exp(-x);
    const double n = static_cast<double>(draws);
    out.lower_frequency = static_cast<double>(below) / n;
    out.upper_frequency = static_cast<double>(above) / n;
    out.standard_error = std::sqrt(out.bound * (1.0 - out.bound) / n);
    out.lower_holds = out.lower_frequency <= out.bound + 3.0 * out.standard_error;
    out.upper_holds = out.upper_frequency <= out.bound + 3.0 * out.standard_error;
    return out;
}

}  // namespace tsvd
