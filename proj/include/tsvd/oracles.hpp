#pragma once

// Deterministic oracle indices and the evaluated right-hand sides of the
// oracle inequalities for the residual stopping rule.

#include <cstddef>

#include "tsvd/estimator.hpp"
#include "tsvd/sequence_model.hpp"

namespace tsvd {

enum class Norm { weak, strong };

/// m_s = min{m in 0..D : V_m >= B_m^2(mu)}.
std::size_t strongly_balanced_discrete(const RiskProfile& profile);

/// t_w = inf{t >= m0 : B_{t,lambda}^2 <= t delta^2} (weak) or
/// t_s = inf{t >= m0 : B_t^2 <= V_t} (strong); D when the set is empty.
double balanced_continuous(const RiskProfile& profile, std::size_t m0, Norm norm);

/// t* = inf{t >= m0 : B_{t,lambda}^2 - t delta^2 <= kappa - D delta^2}.
double oracle_proxy(const RiskProfile& profile, double kappa, std::size_t m0);

struct ClassicalOracle {
    std::size_t index = 0;
    double risk = 0.0;
};

/// argmin_m of B_m^2 + V_m (strong) or B_{m,lambda}^2 + m delta^2 (weak),
/// ties to the smallest m.
ClassicalOracle classical_oracle(const RiskProfile& profile, Norm norm = Norm::strong);

/// (delta / R)^{-2 / (2 beta + 2 p + 1)}
double minimax_time(double beta, double p, double radius, double delta);
/// R (delta / R)^{2 beta / (2 beta + 2 p + 1)}
double minimax_rate(double beta, double p, double radius, double delta);

struct OracleSet {
    std::size_t m_s = 0;
    double t_w = 0.0;
    double t_s = 0.0;
    double t_star = 0.0;
    std::size_t classical_discrete = 0;
    double classical_risk = 0.0;
    std::size_t classical_weak = 0;
    double classical_weak_risk = 0.0;
    double kappa = 0.0;
    std::size_t m0 = 0;
};

OracleSet compute_oracles(const RiskProfile& profile, double kappa, std::size_t m0);

struct TheoryBounds {
    /// max_{i > floor(t*)} |lambda_i mu_i| + 4 delta (sqrt(log(sqrt(2) D)) + 1)
    double delta_tau = 0.0;
    /// min(2 sqrt(3) sum_{m > floor(t*)} lambda_m^{-2} exp(-(m-1-t*)_+^2 / (16D + 32 kappa delta^-2)), D)
    double r_v_tau = 0.0;
    /// bound on E[(B_tau^2 - B_{t_s}^2)_+]
    double bias_rhs = 0.0;
    /// bound on E[(B_{tau,lambda}^2 - B_{t*,lambda}^2)_+]
    double weak_dev_rhs = 0.0;
    /// additive term of the strong-norm balanced oracle inequality
    double strong_thm_rhs = 0.0;
    /// r_v_tau delta^2, the bound on E[(S_tau - S_{t*})_+]
    double stochastic_rhs = 0.0;
    /// |kappa - D delta^2| / (sqrt(D) delta^2)
    double c_kappa = 0.0;
    double t_star = 0.0;
    double t_s = 0.0;
};

TheoryBounds theory_bounds(const RiskProfile& profile, double kappa, std::size_t m0);

}  // namespace tsvd
