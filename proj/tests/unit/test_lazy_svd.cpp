#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "tsvd/lazy_svd.hpp"
#include "tsvd/rng.hpp"

using namespace tsvd;

namespace {

Eigen::MatrixXd gaussian_matrix(Eigen::Index p, Eigen::Index d, std::uint64_t seed)
{
    RandomStream rng(seed);
    Eigen::MatrixXd m(p, d);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            m(i, j) = rng.gaussian();
        }
    }
    return m;
}

/// P x D matrix with lambda on the leading diagonal and zeros below.
Eigen::MatrixXd padded_diagonal(const Spectrum& s, Eigen::Index p)
{
    const auto d = static_cast<Eigen::Index>(s.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        m(i, i) = s[static_cast<std::size_t>(i)];
    }
    return m;
}

StoppingConfig config(double kappa, std::size_t m0 = 0)
{
    StoppingConfig c;
    c.kappa = kappa;
    c.m0 = m0;
    c.m0_mode = M0Mode::explicit_index(m0);
    return c;
}

}  // namespace

TEST_SUITE("lazy_svd")
{
    TEST_CASE("diagonal operator")
    {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
        m(0, 0) = 3.0;
        m(1, 1) = 2.0;
        m(2, 2) = 1.0;
        const MatrixOperator a(m);
        DeflationState state;
        const SingularTriplet& first = next_triplet(state, a, 1);
        CHECK(first.sigma == doctest::Approx(3.0).epsilon(1e-10));
        CHECK(std::abs(first.v[0]) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(first.v[0] > 0.0);
        const SingularTriplet& second = next_triplet(state, a, 1);
        CHECK(second.sigma == doctest::Approx(2.0).epsilon(1e-10));
        CHECK(second.v[1] == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(state.matvec_count == 2 * state.iteration_count);
    }

    TEST_CASE("agrees with a dense SVD")
    {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const Eigen::MatrixXd m = gaussian_matrix(5, 3, seed);
            const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
            const MatrixOperator a(m);
            DeflationState state;
            for (Eigen::Index k = 0; k < 3; ++k) {
                const SingularTriplet& t = next_triplet(state, a, seed);
                CHECK(std::abs(t.sigma - svd.singularValues()[k]) <= 1e-8);
                CHECK(std::abs(std::abs(t.v.dot(svd.matrixV().col(k))) - 1.0) <= 1e-6);
                CHECK(std::abs(std::abs(t.u.dot(svd.matrixU().col(k))) - 1.0) <= 1e-6);
                CHECK((m * t.v - t.sigma * t.u).norm() <= 1e-8 * t.sigma);
            }
            CHECK(state.orthonormality_defect() <= 1e-10);
            CHECK(state.ordered(1e-12));
            CHECK_THROWS_AS(next_triplet(state, a, seed), InvalidArgument);
        }
    }

    TEST_CASE("start vectors are reproducible")
    {
        const MatrixOperator a(gaussian_matrix(6, 4, 2));
        DeflationState s1;
        DeflationState s2;
        for (int k = 0; k < 4; ++k) {
            const SingularTriplet& x = next_triplet(s1, a, 9);
            const SingularTriplet& y = next_triplet(s2, a, 9);
            CHECK(x.sigma == y.sigma);
            CHECK(x.v == y.v);
        }
        CHECK(s1.matvec_count == s2.matvec_count);
    }

    TEST_CASE("diagonal operator reproduces the sequence model rule")
    {
        const std::size_t d = 30;
        const Spectrum s = make_polynomial_spectrum(d, 1.0);
        const MatrixOperator a(padded_diagonal(s, 45));
        std::vector<double> mu(d);
        for (std::size_t i = 0; i < d; ++i) {
            mu[i] = std::pow(static_cast<double>(i + 1), -1.5);
        }
        const NoiseModel noise{0.02};
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const Observation obs = simulate_observation(Signal(mu), s, noise, seed);
            Eigen::VectorXd y_raw = Eigen::VectorXd::Zero(45);
            for (std::size_t i = 0; i < d; ++i) {
                y_raw[static_cast<Eigen::Index>(i)] = obs.y[i];
            }
            const StoppingConfig cfg = config(default_kappa(d, 0.02));
            const StopOutcome direct = early_stop(obs, cfg);
            const LazySolveResult lazy = sequential_solve(a, y_raw, noise, cfg);
            CHECK(lazy.outcome.tau == direct.tau);
            CHECK(lazy.triplets_computed == direct.tau);
            CHECK(lazy.matvec_count == 2 * lazy.state.iteration_count);
            const EstimateVector e =
                estimate_at(obs, s, TruncationIndex(static_cast<double>(direct.tau)));
            for (std::size_t i = 0; i < d; ++i) {
                CHECK(std::abs(lazy.estimate.mu_hat[i] - e.mu_hat[i]) <= 1e-8);
            }
            for (std::size_t i = 0; i < lazy.coefficients.size(); ++i) {
                CHECK(std::abs(lazy.coefficients[i] - obs.y[i]) <= 1e-8);
            }
        }
    }

    TEST_CASE("noiseless single spike")
    {
        const std::size_t d = 8;
        Eigen::MatrixXd m = gaussian_matrix(12, 8, 4);
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd mu = 2.5 * svd.matrixV().col(0);
        const Eigen::VectorXd y_raw = m * mu;
        const LazySolveResult r = sequential_solve(MatrixOperator(m), y_raw, {0.0},
                                                   config(1e-12 * y_raw.squaredNorm()));
        CHECK(r.outcome.tau == 1);
        CHECK(r.triplets_computed == 1);
        for (std::size_t i = 0; i < d; ++i) {
            CHECK(std::abs(r.estimate.mu_hat[i] - mu[static_cast<Eigen::Index>(i)]) <= 1e-8);
        }
    }

    TEST_CASE("two-step on the lazy path")
    {
        const Spectrum s = make_polynomial_spectrum(6, 0.5);
        const MatrixOperator a(padded_diagonal(s, 6));
        Eigen::VectorXd y(6);
        y << 0.0, 0.0, 0.0, 0.01, 0.01, 0.01;
        LazySolveOptions opt;
        opt.two_step = true;
        const LazySolveResult r = sequential_solve(a, y, {0.1}, config(0.06, 3), opt);
        CHECK(r.outcome.tau == 3);
        REQUIRE(r.outcome.rho.has_value());
        CHECK(*r.outcome.rho == 0);
        CHECK(r.estimate.t.value() == 0.0);
    }

    TEST_CASE("triplet budget")
    {
        const MatrixOperator a(gaussian_matrix(10, 6, 1));
        const Eigen::VectorXd y = Eigen::VectorXd::Ones(10);
        LazySolveOptions opt;
        opt.triplet_budget = 2;
        try {
            sequential_solve(a, y, {0.1}, config(0.0), opt);
            FAIL("expected BudgetExceeded");
        } catch (const BudgetExceeded& e) {
            CHECK(e.state().computed.size() == 2);
            CHECK(e.coefficients().size() == 2);
            CHECK(std::string(e.kind()) == "budget_exceeded");
        }
    }

    TEST_CASE("rank deficiency")
    {
        Eigen::VectorXd u(5);
        u << 1, 2, 3, 4, 5;
        Eigen::VectorXd w(3);
        w << 1, -1, 2;
        const MatrixOperator a(u * w.transpose());
        DeflationState state;
        CHECK(next_triplet(state, a, 0).sigma == doctest::Approx(u.norm() * w.norm()));
        CHECK_THROWS_AS(next_triplet(state, a, 0), RankDeficiency);
        DeflationState zero_state;
        CHECK_THROWS_AS(next_triplet(zero_state, MatrixOperator(Eigen::MatrixXd::Zero(3, 2)), 0),
                        RankDeficiency);
    }

    TEST_CASE("iteration cap")
    {
        // two iterations cannot settle the Rayleigh quotient to 1e-10
        const MatrixOperator a(gaussian_matrix(40, 20, 3));
        DeflationState state;
        state.options.max_iterations = 2;
        CHECK_THROWS_AS(next_triplet(state, a, 0), ConvergenceError);
    }

    TEST_CASE("operator validation")
    {
        CHECK_THROWS_AS(MatrixOperator(Eigen::MatrixXd::Zero(2, 3)), DimensionMismatch);
        Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(3, 2);
        bad(0, 0) = std::nan("");
        CHECK_THROWS_AS(MatrixOperator{bad}, InvalidArgument);
        const MatrixOperator a(Eigen::MatrixXd::Identity(3, 2));
        CHECK_THROWS_AS(sequential_solve(a, Eigen::VectorXd::Ones(2), {0.1}, config(0.0)),
                        DimensionMismatch);
    }

    TEST_CASE("matrix files")
    {
        const auto dir = std::filesystem::temp_directory_path();
        const Eigen::MatrixXd m = gaussian_matrix(3, 2, 6);

        const auto text = dir / "tsvd_matrix_test.txt";
        {
            std::ofstream out(text);
            out.precision(17);
            out << "3 2\n";
            for (int i = 0; i < 3; ++i) {
                out << m(i, 0) << ' ' << m(i, 1) << '\n';
            }
        }
        CHECK(MatrixOperator::load(text).entries() == m);

        const auto binary = dir / "tsvd_matrix_test.bin";
        {
            std::ofstream out(binary, std::ios::binary);
            out.write("TSVDMAT1", 8);
            const std::uint64_t dims[2] = {3, 2};
            out.write(reinterpret_cast<const char*>(dims), sizeof dims);
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 2; ++j) {
                    const double v = m(i, j);
                    out.write(reinterpret_cast<const char*>(&v), sizeof v);
                }
            }
        }
        CHECK(MatrixOperator::load(binary).entries() == m);

        {
            std::ofstream out(text);
            out << "3 2\n1 2 3\n";
        }
        CHECK_THROWS_AS(MatrixOperator::load(text), InvalidArgument);
        std::filesystem::remove(text);
        std::filesystem::remove(binary);
        CHECK_THROWS_AS(MatrixOperator::load(text), InvalidArgument);
    }
}
