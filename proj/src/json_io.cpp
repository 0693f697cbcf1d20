#include "tsvd/json_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "tsvd/error.hpp"

namespace tsvd {

namespace {

std::string join_path(const std::string& prefix, const std::string& key)
{
    return prefix.empty() ? key : prefix + "." + key;
}

void merge_at(Json& base, const Json& patch, const std::string& prefix)
{
    if (!patch.is_object()) {
        throw ConfigError("config" + (prefix.empty() ? "" : " key '" + prefix + "'") +
                          " must be an object");
    }
    for (const auto& [key, value] : patch.items()) {
        const std::string path = join_path(prefix, key);
        if (!base.contains(key)) {
            throw ConfigError("unknown config key '" + path + "'");
        }
        Json& slot = base[key];
        if (slot.is_object()) {
            merge_at(slot, value, path);
        } else {
            slot = value;
        }
    }
}

template <typename T>
T get(const Json& config, const char* section, const char* key)
{
    const Json& node = section ? config.at(section) : config;
    try {
        return node.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        const std::string path = section ? std::string(section) + "." + key : key;
        throw ConfigError("config key '" + path + "' has the wrong type");
    }
}

template <typename T>
std::optional<T> get_optional(const Json& config, const char* section, const char* key)
{
    const Json& node = section ? config.at(section) : config;
    if (!node.contains(key) || node.at(key).is_null()) {
        return std::nullopt;
    }
    return get<T>(config, section, key);
}

std::size_t get_index(const Json& config, const char* section, const char* key)
{
    const Json& node = section ? config.at(section) : config;
    const Json& v = node.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        const std::string path = section ? std::string(section) + "." + key : key;
        throw ConfigError("config key '" + path + "' must be a nonnegative integer");
    }
    return v.get<std::size_t>();
}

M0Mode m0_from_json(const Json& value, const char* key)
{
    if (value.is_number_integer() && value.get<long long>() >= 0) {
        return M0Mode::explicit_index(value.get<std::size_t>());
    }
    if (value.is_string()) {
        return M0Mode::parse(value.get<std::string>());
    }
    throw ConfigError(std::string("config key 'stopping.") + key +
                      "' must be a mode name or a nonnegative integer");
}

Norm norm_from_string(const std::string& name)
{
    if (name == "strong") {
        return Norm::strong;
    }
    if (name == "weak") {
        return Norm::weak;
    }
    throw ConfigError("unknown norm: " + name);
}

Json quartiles_json(const Quartiles& q)
{
    return Json{{"q1", real(q.q1)}, {"median", real(q.median)}, {"q3", real(q.q3)},
                {"mean", real(q.mean)}};
}

}  // namespace

Json default_config()
{
    return Json{
        {"dimension", 10000},
        {"p", 0.5},
        {"spectrum_file", nullptr},
        {"noise", {{"delta", 0.01}, {"kind", "gaussian"}}},
        {"signal",
         {{"family", "calibrated"},
          {"name", "smooth"},
          {"c", 1.0},
          {"s", 1.0},
          {"file", nullptr},
          {"values", nullptr}}},
        {"stopping",
         {{"kappa", nullptr},
          {"kappa_drift", 0.0},
          {"m0", "zero"},
          {"two_step_m0", "normal_quantile:0.99"},
          {"aic_norm", "strong"},
          {"aic_penalty", 1.0}}},
        {"observation", {{"file", nullptr}}},
        {"seed", 1},
        {"mc",
         {{"replications", 1000},
          {"procedures", {"plain_stop", "two_step_weak", "two_step_strong"}}}},
        {"lazysvd",
         {{"matrix_file", nullptr},
          {"y_file", nullptr},
          {"rows", nullptr},
          {"triplet_budget", nullptr},
          {"two_step", false},
          {"tolerance", 1e-10},
          {"residual_tolerance", 1e-12},
          {"max_iterations", 10000}}},
        {"adversary",
         {{"kind", "residual"}, {"i0", 100}, {"alpha", 0.5}, {"r_bar", 1.0}}},
        {"plot", {{"csv", nullptr}, {"title", nullptr}}},
    };
}

void merge_config(Json& base, const Json& patch)
{
    merge_at(base, patch, "");
}

void apply_override(Json& config, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override must look like key=value: '" + assignment + "'");
    }
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    Json value = Json::parse(text, nullptr, false);
    if (value.is_discarded()) {
        value = text;
    }
    Json* node = &config;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
        if (!node->is_object() || !node->contains(key)) {
            throw ConfigError("unknown config key '" + path + "'");
        }
        node = &(*node)[key];
        if (dot == std::string::npos) {
            break;
        }
        start = dot + 1;
    }
    if (node->is_object()) {
        merge_at(*node, value, path);
    } else {
        *node = std::move(value);
    }
}

Json load_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

NoiseModel noise_from_json(const Json& config)
{
    NoiseModel noise;
    noise.delta = get<double>(config, "noise", "delta");
    const auto kind = get<std::string>(config, "noise", "kind");
    if (kind == "gaussian") {
        noise.kind = NoiseKind::gaussian;
    } else if (kind == "rademacher") {
        noise.kind = NoiseKind::rademacher;
    } else {
        throw ConfigError("unknown noise kind: " + kind);
    }
    if (!std::isfinite(noise.delta) || noise.delta < 0.0) {
        throw ConfigError("noise.delta must be finite and nonnegative");
    }
    return noise;
}

ExperimentConfig experiment_from_json(const Json& config)
{
    ExperimentConfig c;
    c.dimension = get_index(config, nullptr, "dimension");
    c.p = get<double>(config, nullptr, "p");
    if (auto f = get_optional<std::string>(config, nullptr, "spectrum_file")) {
        c.spectrum_file = *f;
    }
    const NoiseModel noise = noise_from_json(config);
    c.delta = noise.delta;
    c.noise_kind = noise.kind;

    c.signal.family = get<std::string>(config, "signal", "family");
    c.signal.name = get<std::string>(config, "signal", "name");
    c.signal.c = get<double>(config, "signal", "c");
    c.signal.s = get<double>(config, "signal", "s");
    if (auto f = get_optional<std::string>(config, "signal", "file")) {
        c.signal.file = *f;
    }
    if (auto v = get_optional<std::vector<double>>(config, "signal", "values")) {
        c.signal.values = *v;
    }

    c.kappa = get_optional<double>(config, "stopping", "kappa");
    c.kappa_drift = get<double>(config, "stopping", "kappa_drift");
    c.plain_m0 = m0_from_json(config.at("stopping").at("m0"), "m0");
    c.two_step_m0 = m0_from_json(config.at("stopping").at("two_step_m0"), "two_step_m0");
    c.aic_penalty = get<double>(config, "stopping", "aic_penalty");

    c.replications = get_index(config, "mc", "replications");
    c.base_seed = get<std::uint64_t>(config, nullptr, "seed");
    c.procedures.clear();
    for (const auto& name : get<std::vector<std::string>>(config, "mc", "procedures")) {
        c.procedures.push_back(parse_procedure(name));
    }
    c.validate();
    return c;
}

StoppingConfig stopping_from_json(const Json& config, bool two_step)
{
    const ExperimentConfig e = experiment_from_json(config);
    const M0Mode mode = two_step ? e.two_step_m0 : e.plain_m0;
    StoppingConfig s = StoppingConfig::make(e.dimension, e.delta, mode, e.effective_kappa());
    s.aic_norm = norm_from_string(get<std::string>(config, "stopping", "aic_norm"));
    s.aic_penalty = e.aic_penalty;
    return s;
}

Json real(double value)
{
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    return value;
}

Json to_json(const OracleSet& o)
{
    return Json{{"m_s", o.m_s},
                {"t_w", real(o.t_w)},
                {"t_s", real(o.t_s)},
                {"t_star", real(o.t_star)},
                {"classical_discrete", o.classical_discrete},
                {"classical_risk", real(o.classical_risk)},
                {"classical_weak", o.classical_weak},
                {"classical_weak_risk", real(o.classical_weak_risk)},
                {"kappa", real(o.kappa)},
                {"m0", o.m0}};
}

Json to_json(const TheoryBounds& b)
{
    return Json{{"delta_tau", real(b.delta_tau)},
                {"r_v_tau", real(b.r_v_tau)},
                {"bias_rhs", real(b.bias_rhs)},
                {"weak_dev_rhs", real(b.weak_dev_rhs)},
                {"strong_thm_rhs", real(b.strong_thm_rhs)},
                {"stochastic_rhs", real(b.stochastic_rhs)},
                {"c_kappa", real(b.c_kappa)},
                {"t_star", real(b.t_star)},
                {"t_s", real(b.t_s)}};
}

Json to_json(const StopOutcome& o)
{
    Json j{{"tau", o.tau},
           {"rho", nullptr},
           {"coefficients_consumed", o.coefficients_consumed},
           {"immediate_stop", o.immediate_stop},
           {"residual_sq", real(o.residual_sq)}};
    if (o.rho) {
        j["rho"] = *o.rho;
    }
    return j;
}

Json to_json(const EfficiencyReport& r)
{
    Json procs = Json::array();
    for (const auto& p : r.procedures) {
        procs.push_back(Json{{"procedure", to_string(p.procedure)},
                             {"eff_strong", quartiles_json(p.eff_strong)},
                             {"eff_weak", quartiles_json(p.eff_weak)},
                             {"immediate_fraction", real(p.immediate_fraction)},
                             {"completed", p.completed},
                             {"failures", p.failures}});
    }
    return Json{{"procedures", procs},
                {"oracles",
                 {{"m_s", r.oracles.m_s},
                  {"t_w", real(r.oracles.t_w)},
                  {"t_s", real(r.oracles.t_s)},
                  {"classical", r.oracles.classical_discrete}}},
                {"kappa", real(r.kappa)},
                {"plain_m0", r.plain_m0},
                {"two_step_m0", r.two_step_m0},
                {"oracle_risk_strong", real(r.oracle_risk_strong)},
                {"oracle_risk_weak", real(r.oracle_risk_weak)},
                {"replications", r.replications},
                {"failures", r.failures}};
}

Json to_json(const AdversaryResult& r, bool with_signal)
{
    Json j{{"i0", r.i0},
           {"predicted_floor", real(r.predicted_floor)},
           {"bias_at_i0", real(r.bias_at_i0)},
           {"conditions_met", nullptr}};
    if (r.conditions_met) {
        j["conditions_met"] = {{"a", r.conditions_met->a},
                               {"b", r.conditions_met->b},
                               {"c", r.conditions_met->c}};
    }
    if (with_signal) {
        Json mu = Json::array();
        for (double v : r.mu_bar.coefficients()) {
            mu.push_back(real(v));
        }
        j["mu_bar"] = std::move(mu);
    }
    return j;
}

Json to_json(const CounterexampleReport& r)
{
    return Json{{"feasible", r.feasible},
                {"reason", r.reason},
                {"p", real(r.p)},
                {"dimension", r.dimension},
                {"delta", real(r.delta)},
                {"mu_d", real(r.mu_d)},
                {"kappa", real(r.kappa)},
                {"t_s", real(r.t_s)},
                {"t_w", real(r.t_w)},
                {"t_star", real(r.t_star)},
                {"bias_t_star", real(r.bias_t_star)},
                {"bias_t_s", real(r.bias_t_s)},
                {"ratio", real(r.ratio)},
                {"verified", r.verified}};
}

}  // namespace tsvd
