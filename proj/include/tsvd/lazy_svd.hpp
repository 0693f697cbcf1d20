#pragma once

// Leading singular triplets on demand: power iteration on A^T A with
// Gram-Schmidt deflation against the right singular vectors found so far.
// sequential_solve drives the stopping rule from these triplets, so a solve
// that stops at tau computes exactly tau triplets.

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "tsvd/error.hpp"
#include "tsvd/estimator.hpp"
#include "tsvd/stopping.hpp"

namespace tsvd {

/// Dense P x D operator with D <= P.
class MatrixOperator {
public:
    explicit MatrixOperator(Eigen::MatrixXd entries);

    /// Text: "P D" followed by P*D reals in row-major order.
    /// Binary: the 8-byte tag "TSVDMAT1", uint64 P, uint64 D, then P*D
    /// little-endian doubles in row-major order.
    static MatrixOperator load(const std::filesystem::path& path);

    std::size_t rows() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(entries_.cols()); }
    const Eigen::MatrixXd& entries() const noexcept { return entries_; }

private:
    Eigen::MatrixXd entries_;
};

struct SingularTriplet {
    double sigma = 0.0;
    Eigen::VectorXd u;
    Eigen::VectorXd v;
    std::size_t iterations = 0;
    /// ||A^T A v - sigma^2 v|| after deflation
    double residual = 0.0;
};

struct PowerOptions {
    /// Relative change of successive Rayleigh quotients.
    double tolerance = 1e-10;
    /// Eigen-residual target, relative to the Rayleigh quotient.
    double residual_tolerance = 1e-12;
    std::size_t max_iterations = 10000;
    /// Iterations without residual improvement, after the Rayleigh quotient
    /// has settled, that are accepted as the rounding floor.
    std::size_t stagnation_window = 200;
};

struct DeflationState {
    std::vector<SingularTriplet> computed;
    std::size_t matvec_count = 0;
    std::size_t iteration_count = 0;
    PowerOptions options;

    /// Largest |<v_i, v_j> - 1(i = j)| and |<u_i, u_j> - 1(i = j)|.
    double orthonormality_defect() const;
    /// True when the sigmas are non-increasing within relative slack.
    bool ordered(double slack) const;
};

class ConvergenceError : public NumericError {
public:
    ConvergenceError(const std::string& what, SingularTriplet best)
        : NumericError(what), best_(std::move(best)) {}
    const char* kind() const noexcept override { return "convergence_error"; }
    const SingularTriplet& best_iterate() const noexcept { return best_; }

private:
    SingularTriplet best_;
};

class BudgetExceeded : public Error {
public:
    BudgetExceeded(const std::string& what, DeflationState state, std::vector<double> coefficients)
        : Error(what), state_(std::move(state)), coefficients_(std::move(coefficients)) {}
    const char* kind() const noexcept override { return "budget_exceeded"; }
    const DeflationState& state() const noexcept { return state_; }
    const std::vector<double>& coefficients() const noexcept { return coefficients_; }

private:
    DeflationState state_;
    std::vector<double> coefficients_;
};

/// Computes the next singular triplet and appends it to state.computed.
/// The start vector is drawn from RandomStream(derive_seed(seed, k)) with k
/// the number of triplets already computed. The first numerically nonzero
/// component of v is made positive.
const SingularTriplet& next_triplet(DeflationState& state, const MatrixOperator& a,
                                    std::uint64_t seed);

struct LazySolveOptions {
    PowerOptions power;
    std::uint64_t seed = 0;
    /// Maximum number of triplets; BudgetExceeded once the rule needs more.
    std::optional<std::size_t> triplet_budget;
    /// Apply the AIC step on the computed coefficients when tau == m0.
    bool two_step = false;
};

struct LazySolveResult {
    /// mu_hat = sum_{i <= t} sigma_i^{-1} Y_i v_i in original coordinates
    EstimateVector estimate;
    StopOutcome outcome;
    std::size_t matvec_count = 0;
    std::size_t triplets_computed = 0;
    std::vector<double> sigmas;
    /// Y_i = <u_i, y_raw>
    std::vector<double> coefficients;
    DeflationState state;
};

/// Residual stopping on the fly: after the m-th triplet, Y_m = <u_m, y_raw>
/// and R_m^2 = ||y_raw||^2 - sum_{i <= m} Y_i^2.
LazySolveResult sequential_solve(const MatrixOperator& a, const Eigen::VectorXd& y_raw,
                                 const NoiseModel& noise, const StoppingConfig& config,
                                 const LazySolveOptions& options = {});

}  // namespace tsvd
