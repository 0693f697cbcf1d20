#include "tsvd/mc_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "tsvd/error.hpp"
#include "tsvd/estimator.hpp"
#include "tsvd/numeric.hpp"
#include "tsvd/rng.hpp"

namespace tsvd {

namespace {

struct FamilyDef {
    const char* name;
    const char* family;
    double s;
    double target;
};

constexpr FamilyDef family_table[] = {
    {"super_smooth", "exponential", 0.1, 34.0},
    {"smooth", "power", 0.5, 316.0},
    {"rough", "power", 0.4, 1356.0},
};

std::vector<double> family_values(const std::string& family, double c, double s,
                                  std::size_t dimension)
{
    std::vector<double> mu(dimension);
    for (std::size_t i = 0; i < dimension; ++i) {
        const double k = static_cast<double>(i + 1);
        if (family == "power") {
            mu[i] = c * std::pow(k, -s);
        } else if (family == "exponential") {
            mu[i] = c * std::exp(-s * k);
        } else {
            throw ConfigError("unknown signal family: " + family);
        }
    }
    return mu;
}

double calibrate_constant(const FamilyDef& def)
{
    const std::size_t d = ReferenceSetup::dimension;
    const Spectrum spectrum = make_polynomial_spectrum(d, ReferenceSetup::p);
    const NoiseModel noise{ReferenceSetup::delta, NoiseKind::gaussian};
    const std::vector<double> shape = family_values(def.family, 1.0, def.s, d);
    auto t_w = [&](double log_c) {
        std::vector<double> mu(shape);
        const double c = std::exp(log_c);
        for (double& x : mu) {
            x *= c;
        }
        return balanced_continuous(RiskProfile(Signal(std::move(mu)), spectrum, noise), 0,
                                   Norm::weak);
    };
    // t_w is non-decreasing in c
    double lo = std::log(1e-8);
    double hi = std::log(1e8);
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (t_w(mid) < def.target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return std::exp(0.5 * (lo + hi));
}

const FamilyDef& find_family(const std::string& name)
{
    for (const auto& def : family_table) {
        if (name == def.name) {
            return def;
        }
    }
    throw ConfigError("unknown calibrated signal: " + name);
}

double safe_efficiency(double oracle_risk, double err)
{
    if (err == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return std::sqrt(oracle_risk) / err;
}

double interpolate(const std::vector<double>& sorted, double q)
{
    const double h = static_cast<double>(sorted.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0 || lo + 1 >= sorted.size()) {
        return sorted[lo];
    }
    return (1.0 - frac) * sorted[lo] + frac * sorted[lo + 1];
}

}  // namespace

std::string to_string(Procedure procedure)
{
    switch (procedure) {
    case Procedure::plain_stop:
        return "plain_stop";
    case Procedure::two_step_weak:
        return "two_step_weak";
    case Procedure::two_step_strong:
        return "two_step_strong";
    case Procedure::fixed_oracle:
        return "fixed_oracle";
    }
    return "unknown";
}

Procedure parse_procedure(const std::string& name)
{
    for (Procedure p : {Procedure::plain_stop, Procedure::two_step_weak,
                        Procedure::two_step_strong, Procedure::fixed_oracle}) {
        if (name == to_string(p)) {
            return p;
        }
    }
    throw ConfigError("unknown procedure: " + name);
}

CalibratedFamily calibrate(const std::string& name)
{
    const FamilyDef& def = find_family(name);
    static std::mutex mutex;
    static std::map<std::string, double> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(name);
    if (it == cache.end()) {
        it = cache.emplace(name, calibrate_constant(def)).first;
    }
    return {def.name, def.family, def.s, def.target, it->second};
}

std::vector<std::string> calibrated_names()
{
    std::vector<std::string> names;
    for (const auto& def : family_table) {
        names.emplace_back(def.name);
    }
    return names;
}

Signal make_signal(const SignalSpec& spec, std::size_t dimension)
{
    if (spec.family == "calibrated") {
        const CalibratedFamily cal = calibrate(spec.name);
        return Signal(family_values(cal.family, cal.c, cal.s, dimension));
    }
    if (spec.family == "power" || spec.family == "exponential") {
        return Signal(family_values(spec.family, spec.c, spec.s, dimension));
    }
    if (spec.family == "zero") {
        return Signal::zero(dimension);
    }
    std::vector<double> values;
    if (spec.family == "file") {
        if (!spec.file) {
            throw ConfigError("signal.file is required for family 'file'");
        }
        values = load_column_file(*spec.file);
    } else if (spec.family == "values") {
        values = spec.values;
    } else {
        throw ConfigError("unknown signal family: " + spec.family);
    }
    if (values.size() != dimension) {
        throw ConfigError("signal has " + std::to_string(values.size()) +
                          " coefficients, expected D = " + std::to_string(dimension));
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw ConfigError("signal coefficients must be finite");
        }
    }
    return Signal(std::move(values));
}

void ExperimentConfig::validate() const
{
    if (dimension == 0) {
        throw ConfigError("dimension must be at least 1");
    }
    if (replications == 0) {
        throw ConfigError("replications must be at least 1");
    }
    if (procedures.empty()) {
        throw ConfigError("at least one procedure is required");
    }
    if (!std::isfinite(delta) || delta < 0.0) {
        throw ConfigError("delta must be finite and nonnegative");
    }
    if (!spectrum_file && (!std::isfinite(p) || p < 0.0)) {
        throw ConfigError("p must be finite and nonnegative");
    }
    if (kappa && (!std::isfinite(*kappa) || *kappa < 0.0)) {
        throw ConfigError("kappa must be finite and nonnegative");
    }
    if (!std::isfinite(aic_penalty) || aic_penalty <= 0.0) {
        throw ConfigError("aic_penalty must be positive");
    }
    if (spectrum_file && !std::filesystem::exists(*spectrum_file)) {
        throw ConfigError("spectrum file not found: " + spectrum_file->string());
    }
    if (signal.file && !std::filesystem::exists(*signal.file)) {
        throw ConfigError("signal file not found: " + signal.file->string());
    }
    try {
        resolve_m0(plain_m0, dimension);
        resolve_m0(two_step_m0, dimension);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

Spectrum ExperimentConfig::make_spectrum() const
{
    if (!spectrum_file) {
        return make_polynomial_spectrum(dimension, p);
    }
    std::vector<double> values = load_column_file(*spectrum_file);
    if (values.size() != dimension) {
        throw ConfigError("spectrum file has " + std::to_string(values.size()) +
                          " values, expected D = " + std::to_string(dimension));
    }
    return Spectrum(std::move(values));
}

Signal ExperimentConfig::make_signal() const
{
    return tsvd::make_signal(signal, dimension);
}

double ExperimentConfig::effective_kappa() const
{
    return kappa ? *kappa : default_kappa(dimension, delta, kappa_drift);
}

Quartiles quartiles(std::vector<double> values)
{
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (values.empty()) {
        return {nan, nan, nan, nan};
    }
    std::sort(values.begin(), values.end());
    CompensatedSum sum;
    for (double v : values) {
        sum.add(v);
    }
    return {interpolate(values, 0.25), interpolate(values, 0.5), interpolate(values, 0.75),
            sum.value() / static_cast<double>(values.size())};
}

OracleIndices oracle_indices(const ExperimentConfig& config)
{
    const RiskProfile profile(config.make_signal(), config.make_spectrum(), config.noise());
    const OracleSet set = compute_oracles(profile, config.effective_kappa(), 0);
    return {set.m_s, set.t_w, set.t_s, set.classical_discrete};
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t threads)
{
    config.validate();
    const Spectrum spectrum = config.make_spectrum();
    const Signal mu = config.make_signal();
    const NoiseModel noise = config.noise();
    noise.validate();
    const std::size_t d = config.dimension;

    const RiskProfile profile(mu, spectrum, noise);
    const double kappa = config.effective_kappa();
    const OracleSet oracles = compute_oracles(profile, kappa, 0);

    StoppingConfig plain = StoppingConfig::make(d, config.delta, config.plain_m0, kappa);
    StoppingConfig two_strong = StoppingConfig::make(d, config.delta, config.two_step_m0, kappa);
    two_strong.aic_penalty = config.aic_penalty;
    two_strong.aic_norm = Norm::strong;
    StoppingConfig two_weak = two_strong;
    two_weak.aic_norm = Norm::weak;

    const double risk_strong = oracles.classical_risk;
    const double risk_weak = oracles.classical_weak_risk;
    const std::size_t n_proc = config.procedures.size();

    struct Slot {
        std::vector<std::optional<ReplicationRecord>> records;
        std::vector<std::string> failures;
    };
    std::vector<Slot> slots(config.replications);

    auto run_one = [&](std::size_t rep) {
        Slot& slot = slots[rep];
        slot.records.assign(n_proc, std::nullopt);
        Observation obs;
        try {
            obs = simulate_observation(mu, spectrum, noise, derive_seed(config.base_seed, rep));
        } catch (const std::exception& e) {
            slot.failures.push_back("rep " + std::to_string(rep) + ": " + e.what());
            return;
        }
        for (std::size_t k = 0; k < n_proc; ++k) {
            const Procedure proc = config.procedures[k];
            try {
                ReplicationRecord rec;
                rec.procedure = proc;
                rec.rep = rep;
                EstimateVector est;
                switch (proc) {
                case Procedure::plain_stop: {
                    const StopOutcome out = early_stop(obs, plain);
                    rec.tau = out.tau;
                    rec.immediate_stop = out.immediate_stop;
                    est = estimate_at(obs, spectrum, TruncationIndex(static_cast<double>(out.tau)));
                    break;
                }
                case Procedure::two_step_weak:
                case Procedure::two_step_strong: {
                    const auto& cfg = proc == Procedure::two_step_weak ? two_weak : two_strong;
                    TwoStepResult res = two_step(obs, spectrum, noise, cfg);
                    rec.tau = res.outcome.tau;
                    rec.rho = res.outcome.rho;
                    rec.immediate_stop = res.outcome.immediate_stop;
                    est = std::move(res.estimate);
                    break;
                }
                case Procedure::fixed_oracle:
                    rec.tau = oracles.classical_discrete;
                    est = estimate_at(obs, spectrum,
                                      TruncationIndex(static_cast<double>(rec.tau)));
                    break;
                }
                rec.err_strong = std::sqrt(squared_error(est, mu));
                rec.err_weak = std::sqrt(weak_squared_error(est, mu, spectrum));
                rec.eff_strong = safe_efficiency(risk_strong, rec.err_strong);
                rec.eff_weak = safe_efficiency(risk_weak, rec.err_weak);
                slot.records[k] = rec;
            } catch (const std::exception& e) {
                slot.failures.push_back("rep " + std::to_string(rep) + " " + to_string(proc) +
                                        ": " + e.what());
            }
        }
    };

    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = std::min(threads, config.replications);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t rep = next++; rep < config.replications; rep = next++) {
            run_one(rep);
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < threads; ++i) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    ExperimentResult result;
    EfficiencyReport& report = result.report;
    report.oracles = {oracles.m_s, oracles.t_w, oracles.t_s, oracles.classical_discrete};
    report.kappa = kappa;
    report.plain_m0 = plain.m0;
    report.two_step_m0 = two_strong.m0;
    report.oracle_risk_strong = risk_strong;
    report.oracle_risk_weak = risk_weak;
    report.replications = config.replications;

    std::vector<std::vector<double>> eff_s(n_proc);
    std::vector<std::vector<double>> eff_w(n_proc);
    std::vector<std::size_t> immediate(n_proc, 0);
    std::vector<std::size_t> failed(n_proc, 0);
    for (const Slot& slot : slots) {
        for (std::size_t k = 0; k < n_proc; ++k) {
            const auto& rec = slot.records[k];
            if (!rec) {
                ++failed[k];
                continue;
            }
            eff_s[k].push_back(rec->eff_strong);
            eff_w[k].push_back(rec->eff_weak);
            immediate[k] += rec->immediate_stop ? 1 : 0;
            result.records.push_back(*rec);
        }
        report.failures.insert(report.failures.end(), slot.failures.begin(), slot.failures.end());
    }
    for (std::size_t k = 0; k < n_proc; ++k) {
        ProcedureSummary s;
        s.procedure = config.procedures[k];
        s.completed = eff_s[k].size();
        s.failures = failed[k];
        s.immediate_fraction =
            s.completed == 0 ? 0.0
                             : static_cast<double>(immediate[k]) / static_cast<double>(s.completed);
        s.eff_strong = quartiles(std::move(eff_s[k]));
        s.eff_weak = quartiles(std::move(eff_w[k]));
        report.procedures.push_back(s);
    }
    return result;
}

std::string format_double(double value)
{
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_csv(std::ostream& out, const std::vector<ReplicationRecord>& records,
               const std::string& config_line)
{
    if (!config_line.empty()) {
        out << "# config: " << config_line << '\n';
    }
    out << "procedure,rep,tau,rho,immediate,err_strong,err_weak,eff_strong,eff_weak\n";
    for (const auto& r : records) {
        out << to_string(r.procedure) << ',' << r.rep << ',' << r.tau << ',';
        if (r.rho) {
            out << *r.rho;
        }
        out << ',' << (r.immediate_stop ? 1 : 0) << ',' << format_double(r.err_strong) << ','
            << format_double(r.err_weak) << ',' << format_double(r.eff_strong) << ','
            << format_double(r.eff_weak) << '\n';
    }
}

namespace {

double parse_double(const std::string& field)
{
    if (field == "inf") {
        return std::numeric_limits<double>::infinity();
    }
    if (field == "-inf") {
        return -std::numeric_limits<double>::infinity();
    }
    if (field == "nan") {
        return std::numeric_limits<double>::quiet_NaN();
    }
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (field.empty() || *end != '\0') {
        throw InvalidArgument("csv: not a number: '" + field + "'");
    }
    return v;
}

std::size_t parse_index(const std::string& field)
{
    char* end = nullptr;
    const unsigned long long v = std::strtoull(field.c_str(), &end, 10);
    if (field.empty() || *end != '\0') {
        throw InvalidArgument("csv: not an index: '" + field + "'");
    }
    return static_cast<std::size_t>(v);
}

}  // namespace

std::vector<ReplicationRecord> read_csv(std::istream& in)
{
    std::vector<ReplicationRecord> records;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (!header) {
            if (line.rfind("procedure,", 0) != 0) {
                throw InvalidArgument("csv: missing header");
            }
            header = true;
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            f.push_back(cell);
        }
        if (!line.empty() && line.back() == ',') {
            f.emplace_back();
        }
        if (f.size() != 9) {
            throw InvalidArgument("csv: expected 9 fields in '" + line + "'");
        }
        ReplicationRecord r;
        try {
            r.procedure = parse_procedure(f[0]);
        } catch (const ConfigError&) {
            throw InvalidArgument("csv: unknown procedure '" + f[0] + "'");
        }
        r.rep = parse_index(f[1]);
        r.tau = parse_index(f[2]);
        if (!f[3].empty()) {
            r.rho = parse_index(f[3]);
        }
        r.immediate_stop = f[4] == "1";
        r.err_strong = parse_double(f[5]);
        r.err_weak = parse_double(f[6]);
        r.eff_strong = parse_double(f[7]);
        r.eff_weak = parse_double(f[8]);
        records.push_back(r);
    }
    if (!header) {
        throw InvalidArgument("csv: missing header");
    }
    return records;
}

}  // namespace tsvd
