#pragma once

// Reproducible Monte Carlo experiments: one simulated observation per
// replication, shared by every procedure (common random numbers), with the
// replication seed derived from (base_seed, rep).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tsvd/oracles.hpp"
#include "tsvd/sequence_model.hpp"
#include "tsvd/stopping.hpp"

namespace tsvd {

enum class Procedure { plain_stop, two_step_weak, two_step_strong, fixed_oracle };

std::string to_string(Procedure procedure);
/// Throws ConfigError for unknown names.
Procedure parse_procedure(const std::string& name);

/// The reference setup at which the named test signals are calibrated.
struct ReferenceSetup {
    static constexpr std::size_t dimension = 10000;
    static constexpr double delta = 0.01;
    static constexpr double p = 0.5;
};

/// mu_i = c i^{-s} (power) or c e^{-s i} (exponential), with c solved so
/// that the weakly balanced oracle t_w hits the target at the reference setup.
struct CalibratedFamily {
    std::string name;
    std::string family;
    double s = 0.0;
    double target_t_w = 0.0;
    double c = 0.0;
};

/// Named signals: "super_smooth" (exponential, s = 0.1, t_w = 34),
/// "smooth" (power, s = 0.5, t_w = 316), "rough" (power, s = 0.4, t_w = 1356).
CalibratedFamily calibrate(const std::string& name);
std::vector<std::string> calibrated_names();

struct SignalSpec {
    /// calibrated | power | exponential | zero | file | values
    std::string family = "calibrated";
    std::string name = "smooth";
    double c = 1.0;
    double s = 1.0;
    std::optional<std::filesystem::path> file;
    std::vector<double> values;
};

/// Builds the signal of length D; calibrated families keep the reference
/// constant c for every D.
Signal make_signal(const SignalSpec& spec, std::size_t dimension);

struct ExperimentConfig {
    std::size_t dimension = ReferenceSetup::dimension;
    double p = ReferenceSetup::p;
    std::optional<std::filesystem::path> spectrum_file;
    double delta = ReferenceSetup::delta;
    NoiseKind noise_kind = NoiseKind::gaussian;
    SignalSpec signal;
    /// Explicit threshold; D delta^2 + kappa_drift sqrt(D) delta^2 when absent.
    std::optional<double> kappa;
    double kappa_drift = 0.0;
    /// Start index of the plain stopping rule.
    M0Mode plain_m0 = M0Mode::zero();
    /// Start index of the two-step rule.
    M0Mode two_step_m0 = M0Mode::normal_quantile(0.99);
    double aic_penalty = 1.0;
    std::size_t replications = 1000;
    std::uint64_t base_seed = 1;
    std::vector<Procedure> procedures{Procedure::plain_stop, Procedure::two_step_weak,
                                      Procedure::two_step_strong};

    void validate() const;
    Spectrum make_spectrum() const;
    Signal make_signal() const;
    NoiseModel noise() const { return {delta, noise_kind}; }
    double effective_kappa() const;
};

struct ReplicationRecord {
    Procedure procedure = Procedure::plain_stop;
    std::size_t rep = 0;
    std::size_t tau = 0;
    std::optional<std::size_t> rho;
    bool immediate_stop = false;
    /// ||mu_hat - mu|| and ||mu_hat - mu||_lambda
    double err_strong = 0.0;
    double err_weak = 0.0;
    /// oracle root-risk over realized error; +inf for zero error
    double eff_strong = 0.0;
    double eff_weak = 0.0;
};

struct Quartiles {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double mean = 0.0;
};

/// Type-7 (linear interpolation) sample quartiles and the mean.
Quartiles quartiles(std::vector<double> values);

struct ProcedureSummary {
    Procedure procedure = Procedure::plain_stop;
    Quartiles eff_strong;
    Quartiles eff_weak;
    double immediate_fraction = 0.0;
    std::size_t completed = 0;
    std::size_t failures = 0;
};

struct OracleIndices {
    std::size_t m_s = 0;
    double t_w = 0.0;
    double t_s = 0.0;
    std::size_t classical_discrete = 0;
};

/// Oracle indices of the configured signal (with m0 = 0).
OracleIndices oracle_indices(const ExperimentConfig& config);

struct EfficiencyReport {
    std::vector<ProcedureSummary> procedures;
    OracleIndices oracles;
    double kappa = 0.0;
    std::size_t plain_m0 = 0;
    std::size_t two_step_m0 = 0;
    /// min_m E||mu_hat^(m) - mu||^2 and its weak-norm analogue
    double oracle_risk_strong = 0.0;
    double oracle_risk_weak = 0.0;
    std::size_t replications = 0;
    std::vector<std::string> failures;
};

struct ExperimentResult {
    EfficiencyReport report;
    /// Ordered by (rep, procedure order in the config).
    std::vector<ReplicationRecord> records;
};

/// threads = 0 picks the hardware concurrency. Results do not depend on it.
ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t threads = 0);

/// Header `procedure,rep,tau,rho,immediate,err_strong,err_weak,eff_strong,eff_weak`,
/// preceded by `# config: <line>` when config_line is non-empty.
void write_csv(std::ostream& out, const std::vector<ReplicationRecord>& records,
               const std::string& config_line = {});

/// Parses the CSV written by write_csv (comment lines skipped).
std::vector<ReplicationRecord> read_csv(std::istream& in);

/// Round-trip formatting of a double ("inf" and "nan" spelled out).
std::string format_double(double value);

}  // namespace tsvd
