#include "tsvd/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tsvd/error.hpp"
#include "tsvd/lazy_svd.hpp"
#include "tsvd/lowerbound_lab.hpp"
#include "tsvd/mc_harness.hpp"
#include "tsvd/rng.hpp"
#include "tsvd/svg_plot.hpp"

namespace tsvd {

namespace {

namespace fs = std::filesystem;

/// Tags separating the random streams of the synthetic operator.
constexpr std::uint64_t left_basis_stream = 0x4c454654;
constexpr std::uint64_t right_basis_stream = 0x52494748;
constexpr std::uint64_t operator_noise_stream = 0x4e4f4953;

struct Context {
    Json config;
    fs::path out_dir;
    std::size_t threads = 0;
    std::vector<std::string> written;
};

void write_text(Context& ctx, const std::string& name, const std::string& text)
{
    const fs::path path = ctx.out_dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw Error("write failed: " + path.string());
    }
    ctx.written.push_back(path.string());
}

void write_result(Context& ctx, const std::string& name, const std::string& key, Json result)
{
    Json doc{{"config", ctx.config}, {key, std::move(result)}};
    write_text(ctx, name, doc.dump(2) + "\n");
}

Json vector_json(std::span<const double> v)
{
    Json a = Json::array();
    for (double x : v) {
        a.push_back(real(x));
    }
    return a;
}

struct Problem {
    ExperimentConfig experiment;
    Spectrum spectrum;
    Signal signal;
    NoiseModel noise;
};

Problem make_problem(const Json& config)
{
    ExperimentConfig e = experiment_from_json(config);
    Spectrum spectrum = e.make_spectrum();
    Signal signal = e.make_signal();
    NoiseModel noise = e.noise();
    return {std::move(e), std::move(spectrum), std::move(signal), noise};
}

Observation make_observation(const Problem& pb, const Json& config)
{
    const Json& file = config.at("observation").at("file");
    if (file.is_null()) {
        pb.noise.validate();
        return simulate_observation(pb.signal, pb.spectrum, pb.noise, pb.experiment.base_seed);
    }
    std::vector<double> y = load_column_file(file.get<std::string>());
    if (y.size() != pb.experiment.dimension) {
        throw ConfigError("observation file has " + std::to_string(y.size()) +
                          " values, expected D = " + std::to_string(pb.experiment.dimension));
    }
    return Observation::from_data(std::move(y), pb.noise.delta);
}

Json estimate_json(const EstimateVector& est, const Problem& pb, bool simulated)
{
    Json j{{"t", real(est.t.value())}, {"mu_hat", vector_json(est.mu_hat)}};
    if (simulated) {
        j["err_strong"] = real(std::sqrt(squared_error(est, pb.signal)));
        j["err_weak"] = real(std::sqrt(weak_squared_error(est, pb.signal, pb.spectrum)));
    }
    return j;
}

void cmd_oracles(Context& ctx)
{
    const Problem pb = make_problem(ctx.config);
    const RiskProfile profile(pb.signal, pb.spectrum, pb.noise);
    const std::size_t m0 = resolve_m0(pb.experiment.plain_m0, pb.experiment.dimension);
    write_result(ctx, "oracles.json", "oracles",
                 to_json(compute_oracles(profile, pb.experiment.effective_kappa(), m0)));
}

void cmd_bounds(Context& ctx)
{
    const Problem pb = make_problem(ctx.config);
    const RiskProfile profile(pb.signal, pb.spectrum, pb.noise);
    const std::size_t m0 = resolve_m0(pb.experiment.plain_m0, pb.experiment.dimension);
    write_result(ctx, "bounds.json", "bounds",
                 to_json(theory_bounds(profile, pb.experiment.effective_kappa(), m0)));
}

void cmd_stop(Context& ctx, bool two)
{
    const Problem pb = make_problem(ctx.config);
    const Observation obs = make_observation(pb, ctx.config);
    const bool simulated = obs.noise.has_value();
    const StoppingConfig cfg = stopping_from_json(ctx.config, two);
    Json result;
    if (two) {
        const TwoStepResult r = two_step(obs, pb.spectrum, pb.noise, cfg);
        result = {{"kappa", real(cfg.kappa)},
                  {"m0", cfg.m0},
                  {"outcome", to_json(r.outcome)},
                  {"estimate", estimate_json(r.estimate, pb, simulated)}};
    } else {
        const StopOutcome out = early_stop(obs, cfg);
        const EstimateVector est =
            estimate_at(obs, pb.spectrum, TruncationIndex(static_cast<double>(out.tau)));
        result = {{"kappa", real(cfg.kappa)},
                  {"m0", cfg.m0},
                  {"outcome", to_json(out)},
                  {"estimate", estimate_json(est, pb, simulated)}};
    }
    write_result(ctx, two ? "two_step.json" : "stop.json", "result", std::move(result));
}

void cmd_mc(Context& ctx)
{
    const ExperimentConfig e = experiment_from_json(ctx.config);
    const ExperimentResult r = run_experiment(e, ctx.threads);
    std::ostringstream csv;
    write_csv(csv, r.records, ctx.config.dump());
    write_text(ctx, "mc.csv", csv.str());
    write_result(ctx, "mc.json", "report", to_json(r.report));
}

Eigen::MatrixXd random_orthonormal(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed)
{
    RandomStream rng(seed);
    Eigen::MatrixXd g(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            g(i, j) = rng.gaussian();
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

void cmd_lazysvd(Context& ctx)
{
    const Json& lz = ctx.config.at("lazysvd");
    const Problem pb = make_problem(ctx.config);
    const std::uint64_t seed = pb.experiment.base_seed;

    std::optional<MatrixOperator> op;
    Eigen::VectorXd y_raw;
    std::optional<Eigen::VectorXd> truth;
    if (!lz.at("matrix_file").is_null()) {
        op.emplace(MatrixOperator::load(lz.at("matrix_file").get<std::string>()));
        if (lz.at("y_file").is_null()) {
            throw ConfigError("lazysvd.y_file is required with lazysvd.matrix_file");
        }
        const std::vector<double> y = load_column_file(lz.at("y_file").get<std::string>());
        if (y.size() != op->rows()) {
            throw ConfigError("lazysvd.y_file must hold P = " + std::to_string(op->rows()) +
                              " values");
        }
        y_raw = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    } else {
        // A = U diag(lambda) V^T with the configured spectrum; mu = V mu_coef
        const auto d = static_cast<Eigen::Index>(pb.experiment.dimension);
        const auto p = lz.at("rows").is_null()
                           ? d + d / 2
                           : static_cast<Eigen::Index>(lz.at("rows").get<std::size_t>());
        if (p < d) {
            throw ConfigError("lazysvd.rows must be at least the dimension");
        }
        const Eigen::MatrixXd u = random_orthonormal(p, d, derive_seed(seed, left_basis_stream));
        const Eigen::MatrixXd v = random_orthonormal(d, d, derive_seed(seed, right_basis_stream));
        Eigen::VectorXd lambda(d);
        Eigen::VectorXd mu(d);
        for (Eigen::Index i = 0; i < d; ++i) {
            lambda[i] = pb.spectrum[static_cast<std::size_t>(i)];
            mu[i] = pb.signal[static_cast<std::size_t>(i)];
        }
        op.emplace(u * lambda.asDiagonal() * v.transpose());
        truth = v * mu;
        RandomStream rng(derive_seed(seed, operator_noise_stream));
        y_raw = op->entries() * *truth;
        for (Eigen::Index i = 0; i < p; ++i) {
            y_raw[i] += pb.noise.delta * (pb.noise.kind == NoiseKind::gaussian ? rng.gaussian()
                                                                               : rng.rademacher());
        }
    }

    LazySolveOptions opt;
    opt.seed = seed;
    opt.two_step = lz.at("two_step").get<bool>();
    opt.power.tolerance = lz.at("tolerance").get<double>();
    opt.power.residual_tolerance = lz.at("residual_tolerance").get<double>();
    opt.power.max_iterations = lz.at("max_iterations").get<std::size_t>();
    if (!lz.at("triplet_budget").is_null()) {
        opt.triplet_budget = lz.at("triplet_budget").get<std::size_t>();
    }
    const std::size_t d = op->cols();
    const ExperimentConfig& e = pb.experiment;
    const M0Mode mode = opt.two_step ? e.two_step_m0 : e.plain_m0;
    // the P-dimensional residual carries P delta^2 of pure noise
    const double kappa =
        e.kappa ? *e.kappa : default_kappa(op->rows(), e.delta, e.kappa_drift);
    StoppingConfig cfg = StoppingConfig::make(d, e.delta, mode, kappa);
    cfg.aic_penalty = e.aic_penalty;
    cfg.aic_norm = stopping_from_json(ctx.config, opt.two_step).aic_norm;

    const LazySolveResult r = sequential_solve(*op, y_raw, pb.noise, cfg, opt);
    Json result{{"kappa", real(kappa)},
                {"m0", cfg.m0},
                {"outcome", to_json(r.outcome)},
                {"matvec_count", r.matvec_count},
                {"triplets_computed", r.triplets_computed},
                {"sigmas", vector_json(r.sigmas)},
                {"coefficients", vector_json(r.coefficients)},
                {"estimate", vector_json(r.estimate.mu_hat)}};
    if (truth) {
        double err = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double diff = r.estimate.mu_hat[i] - (*truth)[static_cast<Eigen::Index>(i)];
            err += diff * diff;
        }
        result["err_strong"] = real(std::sqrt(err));
    }
    write_result(ctx, "lazysvd.json", "result", std::move(result));
}

void cmd_adversary(Context& ctx)
{
    const Problem pb = make_problem(ctx.config);
    const Json& adv = ctx.config.at("adversary");
    const std::string kind = adv.at("kind").get<std::string>();
    const std::size_t i0 = adv.at("i0").get<std::size_t>();
    const double alpha = adv.at("alpha").get<double>();
    const double r_bar = adv.at("r_bar").get<double>();
    if (i0 >= pb.experiment.dimension) {
        throw ConfigError("adversary.i0 must be below the dimension");
    }
    AdversaryResult r;
    if (kind == "residual") {
        r = residual_adversary(pb.signal, pb.spectrum, pb.noise, i0, alpha, r_bar);
    } else if (kind == "hide") {
        r = hide_signal(pb.signal, i0, alpha, r_bar);
    } else {
        throw ConfigError("unknown adversary kind: " + kind);
    }
    write_result(ctx, "adversary.json", "adversary", to_json(r));
}

void cmd_plot(Context& ctx)
{
    const Json& pl = ctx.config.at("plot");
    const fs::path csv_path =
        pl.at("csv").is_null() ? ctx.out_dir / "mc.csv" : fs::path(pl.at("csv").get<std::string>());
    std::ifstream in(csv_path);
    if (!in) {
        throw ConfigError("cannot open csv: " + csv_path.string());
    }
    std::string first;
    std::getline(in, first);
    Json source = nullptr;
    const std::string tag = "# config: ";
    if (first.rfind(tag, 0) == 0) {
        source = Json::parse(first.substr(tag.size()), nullptr, false);
        if (source.is_discarded()) {
            source = nullptr;
        }
    }
    in.clear();
    in.seekg(0);
    const std::vector<ReplicationRecord> records = read_csv(in);
    std::string title = "Relative efficiency";
    if (!pl.at("title").is_null()) {
        title = pl.at("title").get<std::string>();
    } else if (source.is_object() && source.contains("signal")) {
        const Json& sig = source.at("signal");
        title += " (" + sig.value("family", std::string()) +
                 (sig.value("family", std::string()) == "calibrated"
                      ? " " + sig.value("name", std::string())
                      : std::string()) +
                 ")";
    }
    const Json meta{{"config", ctx.config}, {"source_config", source}};
    write_text(ctx, "plot.svg", render_box_plot(box_glyphs(records), title, meta.dump()));
}

ExitCode classify(const std::exception& e)
{
    if (dynamic_cast<const NumericError*>(&e)) {
        return ExitCode::numeric_error;
    }
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidArgument*>(&e) ||
        dynamic_cast<const MissingNoise*>(&e) || dynamic_cast<const nlohmann::json::exception*>(&e)) {
        return ExitCode::config_error;
    }
    return ExitCode::failure;
}

std::string kind_of(const std::exception& e)
{
    if (const auto* t = dynamic_cast<const Error*>(&e)) {
        return t->kind();
    }
    if (dynamic_cast<const nlohmann::json::exception*>(&e)) {
        return "config_error";
    }
    return "error";
}

int report_error(std::ostream& err, ExitCode code, const std::string& kind,
                 const std::string& message)
{
    const Json record{{"error", {{"kind", kind}, {"message", message}, {"exit_code", static_cast<int>(code)}}}};
    err << record.dump() << '\n';
    return static_cast<int>(code);
}

}  // namespace

const std::vector<std::string>& cli_commands()
{
    static const std::vector<std::string> names{"oracles", "stop",      "two-step", "mc",
                                                "lazysvd", "bounds",    "adversary", "plot"};
    return names;
}

Json effective_config(const CliConfig& cli)
{
    Json config = default_config();
    if (cli.config_path) {
        merge_config(config, load_json_file(cli.config_path->string()));
    }
    for (const auto& o : cli.overrides) {
        apply_override(config, o);
    }
    if (cli.seed) {
        config["seed"] = *cli.seed;
    }
    return config;
}

int run(const CliConfig& cli, std::ostream& out, std::ostream& err)
{
    const auto& names = cli_commands();
    if (std::find(names.begin(), names.end(), cli.command) == names.end()) {
        return report_error(err, ExitCode::unknown_command, "unknown_command",
                            "unknown command '" + cli.command + "'");
    }
    try {
        Context ctx;
        ctx.config = effective_config(cli);
        ctx.threads = cli.threads;
        if (cli.output_dir) {
            ctx.out_dir = *cli.output_dir;
        } else if (const char* env = std::getenv("TSVD_OUTPUT_DIR"); env && *env) {
            ctx.out_dir = env;
        } else {
            ctx.out_dir = ".";
        }
        fs::create_directories(ctx.out_dir);

        if (cli.command == "oracles") {
            cmd_oracles(ctx);
        } else if (cli.command == "bounds") {
            cmd_bounds(ctx);
        } else if (cli.command == "stop") {
            cmd_stop(ctx, false);
        } else if (cli.command == "two-step") {
            cmd_stop(ctx, true);
        } else if (cli.command == "mc") {
            cmd_mc(ctx);
        } else if (cli.command == "lazysvd") {
            cmd_lazysvd(ctx);
        } else if (cli.command == "adversary") {
            cmd_adversary(ctx);
        } else {
            cmd_plot(ctx);
        }
        out << Json{{"command", cli.command}, {"outputs", ctx.written}}.dump() << '\n';
        return static_cast<int>(ExitCode::ok);
    } catch (const std::exception& e) {
        return report_error(err, classify(e), kind_of(e), e.what());
    }
}

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Early stopping for truncated SVD estimators"};
    CliConfig cli;
    std::string config_path;
    std::string output_dir;
    std::uint64_t seed = 0;
    app.add_option("command", cli.command, "oracles | stop | two-step | mc | lazysvd | bounds | "
                                           "adversary | plot")
        ->required();
    auto* config_opt = app.add_option("--config", config_path, "JSON configuration file");
    auto* out_opt = app.add_option("--out", output_dir, "output directory (default $TSVD_OUTPUT_DIR)");
    app.add_option("--set", cli.overrides, "override a config key: dotted.key=value")
        ->allow_extra_args(false);
    auto* seed_opt = app.add_option("--seed", seed, "base seed");
    app.add_option("--threads", cli.threads, "worker threads for mc (0 = all cores)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::RequiredError& e) {
        return report_error(err, ExitCode::unknown_command, "unknown_command", e.what());
    } catch (const CLI::ParseError& e) {
        return report_error(err, ExitCode::config_error, "config_error", e.what());
    }
    if (*config_opt) {
        cli.config_path = config_path;
    }
    if (*out_opt) {
        cli.output_dir = output_dir;
    }
    if (*seed_opt) {
        cli.seed = seed;
    }
    return run(cli, out, err);
}

}  // namespace tsvd
