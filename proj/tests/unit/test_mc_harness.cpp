#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tsvd/error.hpp"
#include "tsvd/mc_harness.hpp"
#include "tsvd/oracles.hpp"
#include "tsvd/rng.hpp"

using namespace tsvd;

namespace {

ExperimentConfig small_config()
{
    ExperimentConfig c;
    c.dimension = 400;
    c.delta = 0.02;
    c.signal.family = "power";
    c.signal.c = 1.0;
    c.signal.s = 1.0;
    c.replications = 40;
    c.base_seed = 11;
    c.two_step_m0 = M0Mode::normal_quantile(0.99);
    c.procedures = {Procedure::plain_stop, Procedure::two_step_weak, Procedure::two_step_strong,
                    Procedure::fixed_oracle};
    return c;
}

}  // namespace

TEST_SUITE("mc_harness")
{
    TEST_CASE("quartiles")
    {
        const Quartiles q = quartiles({1.0, 2.0, 3.0, 4.0});
        CHECK(q.q1 == doctest::Approx(1.75));
        CHECK(q.median == doctest::Approx(2.5));
        CHECK(q.q3 == doctest::Approx(3.25));
        CHECK(q.mean == doctest::Approx(2.5));
        const Quartiles one = quartiles({7.0});
        CHECK(one.q1 == 7.0);
        CHECK(one.q3 == 7.0);
        CHECK(std::isnan(quartiles({}).median));
        const Quartiles shuffled = quartiles({5.0, 1.0, 3.0});
        CHECK(shuffled.median == 3.0);
        CHECK(shuffled.q1 == 2.0);
    }

    TEST_CASE("procedure names")
    {
        for (Procedure p : {Procedure::plain_stop, Procedure::two_step_weak,
                            Procedure::two_step_strong, Procedure::fixed_oracle}) {
            CHECK(parse_procedure(to_string(p)) == p);
        }
        CHECK_THROWS_AS(parse_procedure("gcv"), ConfigError);
    }

    TEST_CASE("format_double round trip")
    {
        for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17}) {
            CHECK(std::stod(format_double(v)) == v);
        }
        CHECK(format_double(HUGE_VAL) == "inf");
        CHECK(format_double(std::nan("")) == "nan");
    }

    TEST_CASE("calibrated families")
    {
        for (const std::string& name : calibrated_names()) {
            const CalibratedFamily f = calibrate(name);
            ExperimentConfig c;
            c.signal.family = "calibrated";
            c.signal.name = name;
            const OracleIndices o = oracle_indices(c);
            CHECK(std::abs(o.t_w - f.target_t_w) <= 0.1 * f.target_t_w);
        }
        CHECK(calibrate("super_smooth").family == "exponential");
        CHECK(calibrate("rough").s == 0.4);
        CHECK_THROWS_AS(calibrate("jagged"), ConfigError);

        // the reference constant is kept for other dimensions
        SignalSpec spec;
        spec.name = "smooth";
        const Signal a = make_signal(spec, 10000);
        const Signal b = make_signal(spec, 200);
        CHECK(b.size() == 200);
        CHECK(a[5] == b[5]);
    }

    TEST_CASE("signal families")
    {
        SignalSpec spec;
        spec.family = "power";
        spec.c = 2.0;
        spec.s = 0.5;
        CHECK(make_signal(spec, 4)[3] == doctest::Approx(1.0));
        spec.family = "exponential";
        spec.s = 1.0;
        CHECK(make_signal(spec, 3)[0] == doctest::Approx(2.0 * std::exp(-1.0)));
        spec.family = "zero";
        CHECK(make_signal(spec, 3)[2] == 0.0);
        spec.family = "values";
        spec.values = {1.0, 2.0};
        CHECK(make_signal(spec, 2)[1] == 2.0);
        CHECK_THROWS_AS(make_signal(spec, 3), ConfigError);
        spec.family = "spline";
        CHECK_THROWS_AS(make_signal(spec, 3), ConfigError);
    }

    TEST_CASE("config validation")
    {
        ExperimentConfig c = small_config();
        c.replications = 0;
        CHECK_THROWS_AS(c.validate(), ConfigError);
        c = small_config();
        c.delta = -1.0;
        CHECK_THROWS_AS(c.validate(), ConfigError);
        c = small_config();
        c.procedures.clear();
        CHECK_THROWS_AS(c.validate(), ConfigError);
        c = small_config();
        c.kappa_drift = 2.0;
        CHECK(c.effective_kappa() == doctest::Approx(400 * 4e-4 + 2.0 * 20.0 * 4e-4));
        c.kappa = 0.3;
        CHECK(c.effective_kappa() == 0.3);
    }

    TEST_CASE("results do not depend on the thread count")
    {
        const ExperimentConfig c = small_config();
        const ExperimentResult one = run_experiment(c, 1);
        const ExperimentResult four = run_experiment(c, 4);
        std::ostringstream a;
        std::ostringstream b;
        write_csv(a, one.records);
        write_csv(b, four.records);
        CHECK(a.str() == b.str());
        CHECK(one.records.size() == 40 * 4);
        CHECK(one.records[0].rep == 0);
        CHECK(one.records[0].procedure == Procedure::plain_stop);
        CHECK(one.records[5].procedure == Procedure::two_step_weak);
    }

    TEST_CASE("records against an independent recomputation")
    {
        const ExperimentConfig c = small_config();
        const ExperimentResult r = run_experiment(c, 2);
        const Spectrum s = c.make_spectrum();
        const Signal mu = c.make_signal();
        const RiskProfile prof(mu, s, c.noise());
        const ClassicalOracle classical = classical_oracle(prof);
        CHECK(r.report.oracle_risk_strong == doctest::Approx(classical.risk));
        StoppingConfig plain = StoppingConfig::make(c.dimension, c.delta, c.plain_m0, c.kappa);
        for (const ReplicationRecord& rec : r.records) {
            const Observation obs =
                simulate_observation(mu, s, c.noise(), derive_seed(c.base_seed, rec.rep));
            std::size_t t = 0;
            if (rec.procedure == Procedure::plain_stop) {
                t = early_stop(obs, plain).tau;
                CHECK(rec.tau == t);
            } else if (rec.procedure == Procedure::fixed_oracle) {
                t = classical.index;
            } else {
                REQUIRE(rec.rho.has_value());
                t = *rec.rho;
            }
            const EstimateVector e = estimate_at(obs, s, TruncationIndex(static_cast<double>(t)));
            const double err = std::sqrt(squared_error(e, mu));
            CHECK(rec.err_strong == doctest::Approx(err).epsilon(1e-12));
            CHECK(rec.eff_strong == doctest::Approx(std::sqrt(classical.risk) / err).epsilon(1e-12));
        }
        for (const ProcedureSummary& p : r.report.procedures) {
            CHECK(p.completed == 40);
            CHECK(p.failures == 0);
        }
    }

    TEST_CASE("zero signal")
    {
        ExperimentConfig c = small_config();
        c.signal.family = "zero";
        const OracleIndices o = oracle_indices(c);
        CHECK(o.m_s == 0);
        CHECK(o.t_w == 0.0);
        CHECK(o.t_s == 0.0);
        CHECK(o.classical_discrete == 0);
    }

    TEST_CASE("noiseless runs give infinite efficiency at exact recovery")
    {
        ExperimentConfig c = small_config();
        c.delta = 0.0;
        c.dimension = 20;
        c.p = 0.0;
        c.replications = 3;
        c.kappa = 0.0;
        c.two_step_m0 = M0Mode::zero();
        c.procedures = {Procedure::plain_stop};
        const ExperimentResult r = run_experiment(c, 1);
        for (const ReplicationRecord& rec : r.records) {
            CHECK(rec.tau == 20);
            CHECK(rec.err_strong == 0.0);
            CHECK(std::isinf(rec.eff_strong));
        }
    }

    TEST_CASE("csv round trip")
    {
        const ExperimentResult r = run_experiment(small_config(), 1);
        std::stringstream io;
        write_csv(io, r.records, "{\"x\":1}");
        CHECK(io.str().rfind("# config: {\"x\":1}\n", 0) == 0);
        const std::vector<ReplicationRecord> back = read_csv(io);
        REQUIRE(back.size() == r.records.size());
        for (std::size_t i = 0; i < back.size(); ++i) {
            CHECK(back[i].procedure == r.records[i].procedure);
            CHECK(back[i].rep == r.records[i].rep);
            CHECK(back[i].tau == r.records[i].tau);
            CHECK(back[i].rho == r.records[i].rho);
            CHECK(back[i].err_strong == r.records[i].err_strong);
            CHECK(back[i].eff_weak == r.records[i].eff_weak);
        }
        std::istringstream bad("procedure,rep\nplain_stop,x\n");
        CHECK_THROWS_AS(read_csv(bad), InvalidArgument);
    }
}
