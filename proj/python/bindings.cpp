#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "tsvd/error.hpp"
#include "tsvd/json_io.hpp"
#include "tsvd/lazy_svd.hpp"
#include "tsvd/lowerbound_lab.hpp"
#include "tsvd/mc_harness.hpp"
#include "tsvd/oracles.hpp"
#include "tsvd/stopping.hpp"

namespace py = pybind11;
using namespace tsvd;

namespace {

NoiseModel noise_of(double delta, const std::string& kind)
{
    NoiseModel n{delta, NoiseKind::gaussian};
    if (kind == "rademacher") {
        n.kind = NoiseKind::rademacher;
    } else if (kind != "gaussian") {
        throw InvalidArgument("unknown noise kind: " + kind);
    }
    n.validate();
    return n;
}

Norm norm_of(const std::string& name)
{
    if (name == "strong") {
        return Norm::strong;
    }
    if (name == "weak") {
        return Norm::weak;
    }
    throw InvalidArgument("unknown norm: " + name);
}

std::size_t m0_of(const py::object& m0, std::size_t dimension)
{
    if (py::isinstance<py::str>(m0)) {
        return resolve_m0(M0Mode::parse(m0.cast<std::string>()), dimension);
    }
    return resolve_m0(M0Mode::explicit_index(m0.cast<std::size_t>()), dimension);
}

StoppingConfig stopping_of(std::size_t dimension, double delta, std::optional<double> kappa,
                           const py::object& m0, const std::string& aic_norm)
{
    StoppingConfig c = StoppingConfig::make(dimension, delta, M0Mode::explicit_index(0), kappa);
    c.m0 = m0_of(m0, dimension);
    c.aic_norm = norm_of(aic_norm);
    c.validate(dimension);
    return c;
}

py::dict outcome_dict(const StopOutcome& o)
{
    py::dict d;
    d["tau"] = o.tau;
    d["rho"] = o.rho ? py::cast(*o.rho) : py::none();
    d["coefficients_consumed"] = o.coefficients_consumed;
    d["immediate_stop"] = o.immediate_stop;
    d["residual_sq"] = o.residual_sq;
    return d;
}

py::object json_to_py(const Json& j)
{
    return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Residual-based early stopping for truncated SVD estimators";

    auto base = py::register_exception<Error>(m, "TsvdError", PyExc_RuntimeError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<NumericError>(m, "NumericError", base.ptr());
    py::register_exception<TruncatedStream>(m, "TruncatedStream", base.ptr());
    py::register_exception<MissingNoise>(m, "MissingNoise", base.ptr());

    m.def(
        "polynomial_spectrum",
        [](std::size_t dimension, double p) {
            const Spectrum s = make_polynomial_spectrum(dimension, p);
            return std::vector<double>(s.values().begin(), s.values().end());
        },
        py::arg("dimension"), py::arg("p"), "lambda_i = i^-p for i = 1..D");

    m.def(
        "simulate",
        [](std::vector<double> mu, std::vector<double> lambda, double delta, std::uint64_t seed,
           const std::string& noise) {
            const Observation obs =
                simulate_observation(Signal(std::move(mu)), Spectrum(std::move(lambda)),
                                     noise_of(delta, noise), seed);
            py::dict d;
            d["y"] = obs.y;
            d["y_norm_sq"] = obs.y_norm_sq;
            d["noise"] = *obs.noise;
            return d;
        },
        py::arg("mu"), py::arg("spectrum"), py::arg("delta"), py::arg("seed"),
        py::arg("noise") = "gaussian", "Y_i = lambda_i mu_i + delta eps_i");

    m.def(
        "oracles",
        [](std::vector<double> mu, std::vector<double> lambda, double delta,
           std::optional<double> kappa, std::size_t m0) {
            const Signal s(std::move(mu));
            const Spectrum sp(std::move(lambda));
            const RiskProfile profile(s, sp, noise_of(delta, "gaussian"));
            const double k = kappa ? *kappa : default_kappa(sp.size(), delta);
            return json_to_py(to_json(compute_oracles(profile, k, m0)));
        },
        py::arg("mu"), py::arg("spectrum"), py::arg("delta"), py::arg("kappa") = py::none(),
        py::arg("m0") = 0);

    m.def(
        "theory_bounds",
        [](std::vector<double> mu, std::vector<double> lambda, double delta,
           std::optional<double> kappa, std::size_t m0) {
            const Signal s(std::move(mu));
            const Spectrum sp(std::move(lambda));
            const RiskProfile profile(s, sp, noise_of(delta, "gaussian"));
            const double k = kappa ? *kappa : default_kappa(sp.size(), delta);
            return json_to_py(to_json(theory_bounds(profile, k, m0)));
        },
        py::arg("mu"), py::arg("spectrum"), py::arg("delta"), py::arg("kappa") = py::none(),
        py::arg("m0") = 0);

    m.def(
        "early_stop",
        [](std::vector<double> y, double delta, std::optional<double> kappa, py::object m0) {
            const Observation obs = Observation::from_data(std::move(y), delta);
            return outcome_dict(early_stop(obs, stopping_of(obs.size(), delta, kappa, m0, "strong")));
        },
        py::arg("y"), py::arg("delta"), py::arg("kappa") = py::none(), py::arg("m0") = 0,
        "tau = min{m >= m0 : R_m^2 <= kappa}");

    m.def(
        "two_step",
        [](std::vector<double> y, std::vector<double> lambda, double delta,
           std::optional<double> kappa, py::object m0, const std::string& aic_norm) {
            const Observation obs = Observation::from_data(std::move(y), delta);
            const Spectrum sp(std::move(lambda));
            const TwoStepResult r = two_step(obs, sp, noise_of(delta, "gaussian"),
                                             stopping_of(obs.size(), delta, kappa, m0, aic_norm));
            py::dict d = outcome_dict(r.outcome);
            d["mu_hat"] = r.estimate.mu_hat;
            return d;
        },
        py::arg("y"), py::arg("spectrum"), py::arg("delta"), py::arg("kappa") = py::none(),
        py::arg("m0") = "normal_quantile:0.99", py::arg("aic_norm") = "strong");

    m.def(
        "calibrate",
        [](const std::string& name) {
            const CalibratedFamily c = calibrate(name);
            py::dict d;
            d["name"] = c.name;
            d["family"] = c.family;
            d["s"] = c.s;
            d["target_t_w"] = c.target_t_w;
            d["c"] = c.c;
            return d;
        },
        py::arg("name"));

    m.def(
        "run_experiment",
        [](const std::string& config_json, std::size_t threads) {
            Json config = default_config();
            merge_config(config, Json::parse(config_json));
            const ExperimentConfig c = experiment_from_json(config);
            ExperimentResult r;
            {
                py::gil_scoped_release release;
                r = run_experiment(c, threads);
            }
            std::ostringstream csv;
            write_csv(csv, r.records, config.dump());
            return py::make_tuple(json_to_py(to_json(r.report)), csv.str());
        },
        py::arg("config_json"), py::arg("threads") = 0,
        "Returns (report, csv_text) for a JSON configuration.");

    m.def(
        "sequential_solve",
        [](const Eigen::MatrixXd& a, const Eigen::VectorXd& y_raw, double delta,
           std::optional<double> kappa, std::size_t m0, std::uint64_t seed,
           std::optional<std::size_t> triplet_budget) {
            const MatrixOperator op(a);
            StoppingConfig cfg = StoppingConfig::make(
                op.cols(), delta, M0Mode::explicit_index(m0),
                kappa ? *kappa : default_kappa(op.rows(), delta));
            LazySolveOptions opt;
            opt.seed = seed;
            opt.triplet_budget = triplet_budget;
            const LazySolveResult r =
                sequential_solve(op, y_raw, noise_of(delta, "gaussian"), cfg, opt);
            py::dict d = outcome_dict(r.outcome);
            d["mu_hat"] = r.estimate.mu_hat;
            d["sigmas"] = r.sigmas;
            d["coefficients"] = r.coefficients;
            d["matvec_count"] = r.matvec_count;
            d["triplets_computed"] = r.triplets_computed;
            return d;
        },
        py::arg("a"), py::arg("y_raw"), py::arg("delta"), py::arg("kappa") = py::none(),
        py::arg("m0") = 0, py::arg("seed") = 0, py::arg("triplet_budget") = py::none());

    m.def(
        "tv_bound",
        [](double a, double b, std::size_t k, bool with_numeric) {
            const TvBoundResult r = tv_bound(a, b, k, with_numeric);
            py::dict d;
            d["bound_general"] = r.bound_general;
            d["bound_simplified"] = r.bound_simplified ? py::cast(*r.bound_simplified) : py::none();
            d["tv_numeric"] = r.tv_numeric ? py::cast(*r.tv_numeric) : py::none();
            return d;
        },
        py::arg("theta_norm"), py::arg("theta_bar_norm"), py::arg("k"),
        py::arg("with_numeric") = false);

    m.def("tv_numeric", &tv_numeric, py::arg("theta_norm"), py::arg("theta_bar_norm"),
          py::arg("k"));

    m.def(
        "counterexample",
        [](double p, std::size_t dimension) {
            return json_to_py(to_json(counterexample_3_2(p, dimension)));
        },
        py::arg("p"), py::arg("dimension"));
}
