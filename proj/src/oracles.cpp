#include "tsvd/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "tsvd/error.hpp"
#include "tsvd/numeric.hpp"

namespace tsvd {

namespace {

constexpr int max_bisection_steps = 60;
constexpr double bisection_tolerance = 1e-10;

/// inf{t in [m0, D] : g(t) <= 0} for non-increasing g. An integer scan
/// brackets the crossing, bisection refines it; the upper end is returned
/// so that the condition holds at the reported index.
double first_crossing(const std::function<double(double)>& g, std::size_t m0, std::size_t d)
{
    if (m0 > d) {
        throw InvalidArgument("m0 exceeds the dimension");
    }
    if (g(static_cast<double>(m0)) <= 0.0) {
        return static_cast<double>(m0);
    }
    std::size_t m = m0 + 1;
    while (m < d && g(static_cast<double>(m)) > 0.0) {
        ++m;
    }
    double lo = static_cast<double>(m - 1);
    double hi = static_cast<double>(m);
    for (int step = 0; step < max_bisection_steps && hi - lo > bisection_tolerance; ++step) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) <= 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

void check_kappa(double kappa)
{
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
        throw InvalidArgument("kappa must be finite and non-negative");
    }
}

}  // namespace

std::size_t strongly_balanced_discrete(const RiskProfile& profile)
{
    const std::size_t d = profile.dimension();
    for (std::size_t m = 0; m < d; ++m) {
        const double t = static_cast<double>(m);
        if (profile.strong_variance(t) >= profile.strong_bias_sq(t)) {
            return m;
        }
    }
    return d;
}

double balanced_continuous(const RiskProfile& profile, std::size_t m0, Norm norm)
{
    if (norm == Norm::weak) {
        return first_crossing(
            [&](double t) { return profile.weak_bias_sq(t) - profile.weak_variance(t); }, m0,
            profile.dimension());
    }
    return first_crossing(
        [&](double t) { return profile.strong_bias_sq(t) - profile.strong_variance(t); }, m0,
        profile.dimension());
}

double oracle_proxy(const RiskProfile& profile, double kappa, std::size_t m0)
{
    check_kappa(kappa);
    const double delta_sq = profile.delta() * profile.delta();
    const double shift = kappa - static_cast<double>(profile.dimension()) * delta_sq;
    return first_crossing(
        [&](double t) { return profile.weak_bias_sq(t) - profile.weak_variance(t) - shift; }, m0,
        profile.dimension());
}

ClassicalOracle classical_oracle(const RiskProfile& profile, Norm norm)
{
    ClassicalOracle best;
    best.risk = norm == Norm::strong ? profile.strong_risk(0.0) : profile.weak_risk(0.0);
    for (std::size_t m = 1; m <= profile.dimension(); ++m) {
        const double t = static_cast<double>(m);
        const double risk = norm == Norm::strong ? profile.strong_risk(t) : profile.weak_risk(t);
        if (risk < best.risk) {
            best = {m, risk};
        }
    }
    return best;
}

double minimax_time(double beta, double p, double radius, double delta)
{
    if (!(radius > 0.0) || !(delta > 0.0)) {
        throw InvalidArgument("minimax_time: radius and delta must be positive");
    }
    if (!(beta >= 0.0) || !(p >= 0.0)) {
        throw InvalidArgument("minimax_time: beta and p must be non-negative");
    }
    return std::pow(delta / radius, -2.0 / (2.0 * beta + 2.0 * p + 1.0));
}

double minimax_rate(double beta, double p, double radius, double delta)
{
    if (!(radius > 0.0) || !(delta > 0.0)) {
        throw InvalidArgument("minimax_rate: radius and delta must be positive");
    }
    if (!(beta >= 0.0) || !(p >= 0.0)) {
        throw InvalidArgument("minimax_rate: beta and p must be non-negative");
    }
    return radius * std::pow(delta / radius, 2.0 * beta / (2.0 * beta + 2.0 * p + 1.0));
}

OracleSet compute_oracles(const RiskProfile& profile, double kappa, std::size_t m0)
{
    OracleSet set;
    set.kappa = kappa;
    set.m0 = m0;
    set.m_s = strongly_balanced_discrete(profile);
    set.t_w = balanced_continuous(profile, m0, Norm::weak);
    set.t_s = balanced_continuous(profile, m0, Norm::strong);
    set.t_star = oracle_proxy(profile, kappa, m0);
    const auto strong = classical_oracle(profile, Norm::strong);
    set.classical_discrete = strong.index;
    set.classical_risk = strong.risk;
    const auto weak = classical_oracle(profile, Norm::weak);
    set.classical_weak = weak.index;
    set.classical_weak_risk = weak.risk;
    return set;
}

TheoryBounds theory_bounds(const RiskProfile& profile, double kappa, std::size_t m0)
{
    check_kappa(kappa);
    const std::size_t d = profile.dimension();
    const double dd = static_cast<double>(d);
    const double delta = profile.delta();
    const double delta_sq = delta * delta;
    const double sqrt_d = std::sqrt(dd);

    TheoryBounds b;
    b.t_star = oracle_proxy(profile, kappa, m0);
    b.t_s = balanced_continuous(profile, m0, Norm::strong);
    const auto star_whole = static_cast<std::size_t>(std::floor(b.t_star));
    const auto s_whole = static_cast<std::size_t>(std::floor(b.t_s));

    b.delta_tau = profile.max_weak_coefficient_from(star_whole + 1) +
                  4.0 * delta * (std::sqrt(std::log(std::sqrt(2.0) * dd)) + 1.0);

    b.weak_dev_rhs = (17.0 * sqrt_d + 64.0) * delta_sq + profile.weak_bias_sq(b.t_star) / sqrt_d;

    // with delta = 0 every bound carries a factor delta^2 and vanishes
    const double kappa_units = delta_sq > 0.0 ? kappa / delta_sq : dd;
    b.bias_rhs = 81.0 * profile.inv_lambda_sq(s_whole + 1) * delta_sq *
                 (b.t_s + sqrt_d + positive_part(kappa_units - dd));

    const double scale = 16.0 * dd + 32.0 * kappa_units;
    CompensatedSum tail;
    for (std::size_t m = star_whole + 1; m <= d; ++m) {
        const double lag = positive_part(static_cast<double>(m) - 1.0 - b.t_star);
        tail.add(profile.inv_lambda_sq(m) * std::exp(-lag * lag / scale));
    }
    b.r_v_tau = std::min(2.0 * std::sqrt(3.0) * tail.value(), dd);
    b.stochastic_rhs = b.r_v_tau * delta_sq;

    b.c_kappa = delta_sq > 0.0 ? std::abs(kappa - dd * delta_sq) / (sqrt_d * delta_sq) : 0.0;
    const auto shifted =
        static_cast<std::size_t>(std::min(std::floor(b.t_s + b.c_kappa * sqrt_d), dd));
    b.strong_thm_rhs = (81.0 * profile.inv_lambda_sq(shifted + 1) *
                            (b.t_s + (1.0 + b.c_kappa) * sqrt_d) +
                        b.r_v_tau) *
                       delta_sq;
    return b;
}

}  // namespace tsvd
