// Acceptance run: one [PASS]/[FAIL] line per criterion, nonzero exit on any failure.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "tsvd/error.hpp"
#include "tsvd/estimator.hpp"
#include "tsvd/lazy_svd.hpp"
#include "tsvd/lowerbound_lab.hpp"
#include "tsvd/mc_harness.hpp"
#include "tsvd/numeric.hpp"
#include "tsvd/oracles.hpp"
#include "tsvd/rng.hpp"
#include "tsvd/stopping.hpp"

using namespace tsvd;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void criterion(const std::string& label, const std::function<Verdict()>& body)
{
    const auto start = Clock::now();
    Verdict v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    char buf[64];
    std::snprintf(buf, sizeof buf, " [%.1f s]", secs);
    std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << label << " :: " << v.detail << buf
              << std::endl;
    if (!v.pass) {
        ++failures;
    }
}

double seconds_since(Clock::time_point t)
{
    return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string fmt(const char* format, double a)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, format, a);
    return buf;
}

StoppingConfig fixed(double kappa, std::size_t m0)
{
    StoppingConfig c;
    c.kappa = kappa;
    c.m0 = m0;
    c.m0_mode = M0Mode::explicit_index(m0);
    return c;
}

Signal calibrated_signal(const std::string& name, std::size_t d)
{
    SignalSpec spec;
    spec.family = "calibrated";
    spec.name = name;
    return make_signal(spec, d);
}

struct MeanSe {
    CompensatedSum sum;
    CompensatedSum sq;
    std::size_t n = 0;
    void add(double x)
    {
        sum.add(x);
        sq.add(x * x);
        ++n;
    }
    double mean() const { return sum.value() / static_cast<double>(n); }
    double se() const
    {
        const double m = mean();
        const double nn = static_cast<double>(n);
        return std::sqrt(std::max(0.0, (sq.value() - nn * m * m) / (nn - 1.0)) / nn);
    }
};

Eigen::MatrixXd random_orthonormal(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed)
{
    RandomStream rng(seed);
    Eigen::MatrixXd g(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            g(i, j) = rng.gaussian();
        }
    }
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

Verdict pathwise_identity()
{
    const std::size_t d = 500;
    const double delta = 0.05;
    const Spectrum s = make_polynomial_spectrum(d, 0.5);
    const Signal mu = calibrated_signal("smooth", d);
    const StoppingConfig cfg = StoppingConfig::make(d, delta, M0Mode::zero());
    const auto start = Clock::now();
    double worst = 0.0;
    for (std::size_t r = 0; r < 1000; ++r) {
        const Observation obs = simulate_observation(mu, s, {delta}, derive_seed(101, r));
        const std::size_t tau = early_stop(obs, cfg).tau;
        const TruncationIndex t(static_cast<double>(tau));
        const double lhs = squared_error(estimate_at(obs, s, t), mu);
        const double rhs = strong_bias_sq(mu, t) + stochastic_error(obs, s, t);
        worst = std::max(worst, std::abs(lhs - rhs) / lhs);
    }
    const double secs = seconds_since(start);
    return {worst <= 1e-10 && secs < 10.0,
            "max relative error " + fmt("%.3g", worst) + ", runtime " + fmt("%.2f s", secs)};
}

Verdict kappa_identity_and_ordering()
{
    const auto start = Clock::now();
    double worst_gap = 0.0;
    std::size_t chain_violations = 0;
    for (std::uint64_t k = 0; k < 200; ++k) {
        RandomStream rng(derive_seed(202, k));
        const std::size_t d = 20 + static_cast<std::size_t>(rng.uniform() * 500);
        const double p = 2.0 * rng.uniform();
        const double smooth = 0.3 + 1.5 * rng.uniform();
        const double scale = std::exp(4.0 * rng.uniform() - 2.0);
        std::vector<double> mu(d);
        for (std::size_t i = 0; i < d; ++i) {
            mu[i] = scale * std::pow(static_cast<double>(i + 1), -smooth) * (1.0 + 0.3 * rng.gaussian());
        }
        const double delta = std::exp(-1.0 - 4.0 * rng.uniform());
        const RiskProfile prof(Signal(std::move(mu)), make_polynomial_spectrum(d, p), {delta});
        const double dd = static_cast<double>(d);
        const double d2 = delta * delta;
        const double t_w = balanced_continuous(prof, 0, Norm::weak);
        worst_gap = std::max(worst_gap, std::abs(oracle_proxy(prof, dd * d2, 0) - t_w));

        const double kappa = dd * d2 * std::exp(3.0 * rng.uniform() - 1.5);
        const double t_star = oracle_proxy(prof, kappa, 0);
        const double t_s = balanced_continuous(prof, 0, Norm::strong);
        if (!(t_star - positive_part(dd - kappa / d2) <= t_w + 1e-9 && t_w <= t_s + 1e-9)) {
            ++chain_violations;
        }
    }
    const double secs = seconds_since(start);
    return {worst_gap <= 1e-9 && chain_violations == 0 && secs < 5.0,
            "max |t*-t_w| " + fmt("%.3g", worst_gap) + ", chain violations " +
                std::to_string(chain_violations) + ", runtime " + fmt("%.2f s", secs)};
}

Verdict null_calibration()
{
    const std::size_t d = 10000;
    const Spectrum s = make_polynomial_spectrum(d, 0.5);
    const Signal zero = Signal::zero(d);
    const StoppingConfig cfg = fixed(1.0, 329);
    const auto start = Clock::now();
    std::size_t late = 0;
    const std::size_t reps = 5000;
    for (std::size_t r = 0; r < reps; ++r) {
        const Observation obs = simulate_observation(zero, s, {0.01}, derive_seed(303, r));
        late += early_stop(obs, cfg).tau > cfg.m0 ? 1 : 0;
    }
    const double secs = seconds_since(start);
    const double f = static_cast<double>(late) / reps;
    return {f >= 0.003 && f <= 0.02 && secs < 60.0,
            "fraction tau > m0 = " + fmt("%.4f", f) + ", runtime " + fmt("%.1f s", secs)};
}

struct SignalRun {
    std::string name;
    CalibratedFamily family;
    OracleIndices oracles;
    EfficiencyReport report;
};

const ProcedureSummary& summary_of(const EfficiencyReport& r, Procedure p)
{
    for (const auto& s : r.procedures) {
        if (s.procedure == p) {
            return s;
        }
    }
    throw InvalidArgument("procedure missing from report");
}

std::vector<SignalRun> efficiency_runs;
double efficiency_seconds = 0.0;

void run_efficiency()
{
    const auto start = Clock::now();
    for (const std::string& name : {"super_smooth", "smooth", "rough"}) {
        ExperimentConfig c;
        c.signal.family = "calibrated";
        c.signal.name = name;
        c.replications = 1000;
        c.base_seed = 404;
        c.procedures = {Procedure::plain_stop, Procedure::two_step_weak, Procedure::two_step_strong};
        efficiency_runs.push_back({name, calibrate(name), oracle_indices(c), run_experiment(c).report});
    }
    efficiency_seconds = seconds_since(start);
}

Verdict efficiency_reproduction()
{
    run_efficiency();
    bool pass = efficiency_seconds < 600.0;
    std::string detail;
    for (const SignalRun& r : efficiency_runs) {
        const bool calibrated =
            std::abs(r.oracles.t_w - r.family.target_t_w) <= 0.1 * r.family.target_t_w;
        const Quartiles& q = summary_of(r.report, Procedure::plain_stop).eff_strong;
        bool ok = calibrated;
        if (r.name == "super_smooth") {
            ok = ok && q.mean >= 0.35 && q.mean <= 0.65;
            detail += r.name + ": t_w " + fmt("%.1f", r.oracles.t_w) + ", mean eff " +
                      fmt("%.3f", q.mean) + "; ";
        } else {
            ok = ok && q.median >= 0.65;
            detail += r.name + ": t_w " + fmt("%.1f", r.oracles.t_w) + ", median eff " +
                      fmt("%.3f", q.median) + "; ";
        }
        pass = pass && ok;
    }
    return {pass, detail + "runtime " + fmt("%.0f s", efficiency_seconds)};
}

Verdict two_step_improvement()
{
    if (efficiency_runs.size() != 3) {
        return {false, "efficiency runs unavailable"};
    }
    const EfficiencyReport& ss = efficiency_runs[0].report;
    const double plain = summary_of(ss, Procedure::plain_stop).eff_strong.median;
    const double two = summary_of(ss, Procedure::two_step_strong).eff_strong.median;
    const double immediate = summary_of(efficiency_runs[2].report, Procedure::two_step_strong).immediate_fraction;
    return {two >= plain + 0.1 && immediate <= 0.05,
            "super_smooth median eff plain " + fmt("%.3f", plain) + " vs two-step " +
                fmt("%.3f", two) + "; rough immediate-stop fraction " + fmt("%.3f", immediate)};
}

Verdict oracle_inequalities()
{
    const std::size_t d = 2000;
    const double delta = 0.01;
    const Spectrum s = make_polynomial_spectrum(d, 0.5);
    const double kappa = default_kappa(d, delta);
    const StoppingConfig cfg = fixed(kappa, 0);
    bool pass = true;
    std::string detail;
    for (const std::string& name : {"super_smooth", "smooth", "rough"}) {
        const Signal mu = calibrated_signal(name, d);
        const RiskProfile prof(mu, s, {delta});
        const TheoryBounds tb = theory_bounds(prof, kappa, 0);
        const TruncationIndex star(tb.t_star);
        const double weak_star = prof.weak_bias_sq(tb.t_star);
        const double bias_ts = prof.strong_bias_sq(tb.t_s);
        MeanSe weak_dev;
        MeanSe bias_dev;
        MeanSe stoch_dev;
        for (std::size_t r = 0; r < 500; ++r) {
            const Observation obs = simulate_observation(mu, s, {delta}, derive_seed(606, r));
            const auto tau = static_cast<double>(early_stop(obs, cfg).tau);
            const TruncationIndex t(tau);
            weak_dev.add(positive_part(prof.weak_bias_sq(tau) - weak_star));
            bias_dev.add(positive_part(prof.strong_bias_sq(tau) - bias_ts));
            stoch_dev.add(positive_part(stochastic_error(obs, s, t) - stochastic_error(obs, s, star)));
        }
        const bool ok = weak_dev.mean() <= tb.weak_dev_rhs + 3.0 * weak_dev.se() &&
                        bias_dev.mean() <= tb.bias_rhs + 3.0 * bias_dev.se() &&
                        stoch_dev.mean() <= tb.stochastic_rhs + 3.0 * stoch_dev.se();
        pass = pass && ok;
        detail += name + ": " + fmt("%.3g", weak_dev.mean()) + "<=" + fmt("%.3g", tb.weak_dev_rhs) +
                  ", " + fmt("%.3g", bias_dev.mean()) + "<=" + fmt("%.3g", tb.bias_rhs) + ", " +
                  fmt("%.3g", stoch_dev.mean()) + "<=" + fmt("%.3g", tb.stochastic_rhs) + "; ";
    }
    return {pass, detail};
}

Verdict tv_lemma()
{
    const std::vector<double> norms{0.0, 0.5, 1.0, 2.0, 5.5, 6.0};
    std::size_t checked = 0;
    std::size_t simplified = 0;
    std::size_t violations = 0;
    double worst_margin = 1.0;
    for (std::size_t k : {2, 10, 50, 200}) {
        for (double a : norms) {
            for (double b : norms) {
                const TvBoundResult r = tv_bound(a, b, k, true);
                const double tv = *r.tv_numeric;
                ++checked;
                if (tv > r.bound_general + 1e-6) {
                    ++violations;
                }
                worst_margin = std::min(worst_margin, r.bound_general - tv);
                if (r.bound_simplified) {
                    ++simplified;
                    if (tv > *r.bound_simplified + 1e-6) {
                        ++violations;
                    }
                }
            }
        }
    }
    return {violations == 0, std::to_string(checked) + " pairs, " + std::to_string(simplified) +
                                 " with the simplified bound, violations " +
                                 std::to_string(violations) + ", min general margin " +
                                 fmt("%.3g", worst_margin)};
}

Verdict tail_domination()
{
    bool pass = true;
    std::string detail;
    RandomStream rng(808);
    for (double x : {0.25, 1.0, 4.0}) {
        std::vector<double> a(100);
        for (double& v : a) {
            v = rng.uniform();
        }
        const TailCheck t = chi_square_tail_check(a, x, 100000, derive_seed(808, static_cast<std::uint64_t>(x * 100)));
        pass = pass && t.lower_holds && t.upper_holds;
        detail += "x=" + fmt("%g", x) + ": lower " + fmt("%.4f", t.lower_frequency) + ", upper " +
                  fmt("%.4f", t.upper_frequency) + " vs " + fmt("%.4f", t.bound) + "; ";
    }
    return {pass, detail};
}

Verdict lazy_svd()
{
    const Eigen::Index p = 300;
    const Eigen::Index d = 200;
    const Eigen::MatrixXd u = random_orthonormal(p, d, 901);
    const Eigen::MatrixXd v = random_orthonormal(d, d, 902);
    const Spectrum s = make_polynomial_spectrum(static_cast<std::size_t>(d), 0.5);
    Eigen::VectorXd lambda(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        lambda[i] = s[static_cast<std::size_t>(i)];
    }
    const Eigen::MatrixXd a = u * lambda.asDiagonal() * v.transpose();

    // top 20 against a dense SVD
    const Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
    const MatrixOperator op(a);
    DeflationState state;
    double worst_sigma = 0.0;
    for (Eigen::Index k = 0; k < 20; ++k) {
        const SingularTriplet& t = next_triplet(state, op, 903);
        worst_sigma = std::max(worst_sigma, std::abs(t.sigma - svd.singularValues()[k]));
    }

    // diagonal operator against the sequence model
    const double delta = 0.1;
    const Signal mu = calibrated_signal("smooth", static_cast<std::size_t>(d));
    Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(p, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        diag(i, i) = lambda[i];
    }
    const Observation obs = simulate_observation(mu, s, {delta}, 904);
    Eigen::VectorXd y_embed = Eigen::VectorXd::Zero(p);
    for (Eigen::Index i = 0; i < d; ++i) {
        y_embed[i] = obs.y[static_cast<std::size_t>(i)];
    }
    const StoppingConfig seq_cfg = fixed(default_kappa(static_cast<std::size_t>(d), delta), 0);
    const std::size_t tau_seq = early_stop(obs, seq_cfg).tau;
    const LazySolveResult diag_run = sequential_solve(MatrixOperator(diag), y_embed, {delta}, seq_cfg);
    const EstimateVector direct = estimate_at(obs, s, TruncationIndex(static_cast<double>(tau_seq)));
    double worst_mu = 0.0;
    for (std::size_t i = 0; i < direct.mu_hat.size(); ++i) {
        worst_mu = std::max(worst_mu, std::abs(direct.mu_hat[i] - diag_run.estimate.mu_hat[i]));
    }

    // dense operator, noise in all P coordinates, kappa = P delta^2
    Eigen::VectorXd mu_seq(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        mu_seq[i] = mu[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd mu_orig = v * mu_seq;
    RandomStream rng(905);
    Eigen::VectorXd y_raw = a * mu_orig;
    for (Eigen::Index i = 0; i < p; ++i) {
        y_raw[i] += delta * rng.gaussian();
    }
    StoppingConfig dense_cfg = fixed(static_cast<double>(p) * delta * delta, 0);
    LazySolveOptions opt;
    opt.seed = 906;
    const LazySolveResult dense = sequential_solve(op, y_raw, {delta}, dense_cfg, opt);

    const bool pass = worst_sigma <= 1e-8 && diag_run.outcome.tau == tau_seq &&
                      worst_mu <= 1e-10 && dense.triplets_computed == dense.outcome.tau &&
                      dense.outcome.tau <= 40;
    return {pass, "top-20 max |sigma - oracle| " + fmt("%.3g", worst_sigma) + "; diagonal tau " +
                      std::to_string(diag_run.outcome.tau) + " vs " + std::to_string(tau_seq) +
                      ", max |mu_hat diff| " + fmt("%.3g", worst_mu) + "; dense tau " +
                      std::to_string(dense.outcome.tau) + " with " +
                      std::to_string(dense.triplets_computed) + " triplets, D = 200"};
}

Verdict counterexample()
{
    const std::optional<std::size_t> d = counterexample_min_dimension(2.0, 100000);
    if (!d) {
        return {false, "no feasible dimension found"};
    }
    const CounterexampleReport r = counterexample_3_2(2.0, *d);
    return {r.feasible && r.ratio >= 3.99,
            "D = " + std::to_string(*d) + ", ratio " + fmt("%.6f", r.ratio)};
}

Verdict lemma23()
{
    const std::size_t d = 2000;
    const double delta = 0.01;
    const Spectrum s = make_polynomial_spectrum(d, 0.5);
    const StoppingConfig cfg = StoppingConfig::make(d, delta, M0Mode::zero());
    const StoppingRule rule = [cfg](const Observation& obs) { return early_stop(obs, cfg).tau; };
    std::size_t premises = 0;
    std::size_t violations = 0;
    std::string detail;
    for (const std::string& name : {"super_smooth", "smooth", "rough", "zero"}) {
        const Signal mu = name == "zero" ? Signal::zero(d) : calibrated_signal(name, d);
        for (std::size_t m : {250, 500, 1000, 2000}) {
            const Lemma23Report r = lemma23_check(rule, mu, s, {delta}, m, 500, derive_seed(1111, m));
            if (r.premise) {
                ++premises;
                if (!r.conclusion) {
                    ++violations;
                }
            }
        }
    }
    return {premises > 0 && violations == 0, std::to_string(premises) +
                                                 " instances with the premise, violations " +
                                                 std::to_string(violations)};
}

}  // namespace

int main()
{
    criterion("AC1 pathwise identity", pathwise_identity);
    criterion("AC2 kappa identity and oracle ordering", kappa_identity_and_ordering);
    criterion("AC3 null-signal calibration", null_calibration);
    criterion("AC4 efficiency reproduction", efficiency_reproduction);
    criterion("AC5 two-step improvement", two_step_improvement);
    criterion("AC6 oracle-inequality domination", oracle_inequalities);
    criterion("AC7 total-variation bound", tv_lemma);
    criterion("AC8 chi-square tail domination", tail_domination);
    criterion("AC9 lazy SVD", lazy_svd);
    criterion("AC10 counterexample ratio", counterexample);
    criterion("AC11 stopping-time implication", lemma23);
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
