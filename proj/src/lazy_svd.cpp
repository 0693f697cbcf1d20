#include "tsvd/lazy_svd.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <utility>

#include "tsvd/numeric.hpp"
#include "tsvd/rng.hpp"

namespace tsvd {

namespace {

constexpr char binary_tag[8] = {'T', 'S', 'V', 'D', 'M', 'A', 'T', '1'};

/// Deflated operators below this fraction of ||A||_F^2 are rounding noise.
constexpr double rank_floor = 1e3 * std::numeric_limits<double>::epsilon();

/// Components below this magnitude do not count as "first nonzero".
constexpr double sign_threshold = 1e-8;

void deflate(Eigen::VectorXd& x, const std::vector<SingularTriplet>& computed)
{
    // two classical Gram-Schmidt passes
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto& t : computed) {
            x -= t.v.dot(x) * t.v;
        }
    }
}

void fix_sign(SingularTriplet& t)
{
    for (Eigen::Index i = 0; i < t.v.size(); ++i) {
        if (std::abs(t.v[i]) > sign_threshold) {
            if (t.v[i] < 0.0) {
                t.v = -t.v;
                t.u = -t.u;
            }
            return;
        }
    }
}

MatrixOperator load_binary(std::ifstream& in, const std::filesystem::path& path)
{
    std::uint64_t dims[2] = {0, 0};
    in.read(reinterpret_cast<char*>(dims), sizeof dims);
    if (!in) {
        throw InvalidArgument(path.string() + ": truncated matrix header");
    }
    const auto p = static_cast<Eigen::Index>(dims[0]);
    const auto d = static_cast<Eigen::Index>(dims[1]);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(p, d);
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * dims[0] * dims[1]));
    if (!in) {
        throw InvalidArgument(path.string() + ": truncated matrix data");
    }
    return MatrixOperator(Eigen::MatrixXd(m));
}

MatrixOperator load_text(std::ifstream& in, const std::filesystem::path& path)
{
    long long p = 0;
    long long d = 0;
    if (!(in >> p >> d) || p <= 0 || d <= 0) {
        throw InvalidArgument(path.string() + ": expected a header 'P D'");
    }
    Eigen::MatrixXd m(p, d);
    for (long long i = 0; i < p; ++i) {
        for (long long j = 0; j < d; ++j) {
            if (!(in >> m(i, j))) {
                throw InvalidArgument(path.string() + ": expected " + std::to_string(p * d) +
                                      " matrix entries");
            }
        }
    }
    return MatrixOperator(std::move(m));
}

}  // namespace

MatrixOperator::MatrixOperator(Eigen::MatrixXd entries) : entries_(std::move(entries))
{
    if (entries_.cols() == 0) {
        throw InvalidArgument("matrix operator: D must be at least 1");
    }
    if (entries_.cols() > entries_.rows()) {
        throw DimensionMismatch("matrix operator: need D <= P");
    }
    if (!entries_.allFinite()) {
        throw InvalidArgument("matrix operator: entries must be finite");
    }
}

MatrixOperator MatrixOperator::load(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidArgument("cannot open matrix file: " + path.string());
    }
    char tag[8] = {};
    in.read(tag, sizeof tag);
    if (in && std::memcmp(tag, binary_tag, sizeof tag) == 0) {
        return load_binary(in, path);
    }
    in.clear();
    in.seekg(0);
    return load_text(in, path);
}

double DeflationState::orthonormality_defect() const
{
    double worst = 0.0;
    for (std::size_t i = 0; i < computed.size(); ++i) {
        for (std::size_t j = i; j < computed.size(); ++j) {
            const double target = i == j ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(computed[i].v.dot(computed[j].v) - target));
            worst = std::max(worst, std::abs(computed[i].u.dot(computed[j].u) - target));
        }
    }
    return worst;
}

bool DeflationState::ordered(double slack) const
{
    for (std::size_t i = 1; i < computed.size(); ++i) {
        if (computed[i].sigma > computed[i - 1].sigma * (1.0 + slack)) {
            return false;
        }
    }
    return true;
}

const SingularTriplet& next_triplet(DeflationState& state, const MatrixOperator& a,
                                    std::uint64_t seed)
{
    const Eigen::MatrixXd& m = a.entries();
    const std::size_t d = a.cols();
    const std::size_t k = state.computed.size();
    if (k >= d) {
        throw InvalidArgument("next_triplet: all D triplets are already computed");
    }
    const PowerOptions& opt = state.options;
    const double scale = m.squaredNorm();
    if (scale == 0.0) {
        throw RankDeficiency("next_triplet: the operator is zero");
    }

    RandomStream rng(derive_seed(seed, k));
    Eigen::VectorXd v(static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] = rng.gaussian();
    }
    deflate(v, state.computed);
    v.normalize();

    SingularTriplet best;
    best.residual = std::numeric_limits<double>::infinity();
    double previous = 0.0;
    bool settled = false;
    std::size_t stall = 0;
    for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
        const Eigen::VectorXd z = m * v;
        Eigen::VectorXd w = m.transpose() * z;
        state.matvec_count += 2;
        ++state.iteration_count;
        deflate(w, state.computed);

        const double w_norm = w.norm();
        if (w_norm <= rank_floor * scale) {
            throw RankDeficiency("next_triplet: deflated operator is numerically zero after " +
                                 std::to_string(k) + " triplets");
        }
        const double rho = v.dot(w);
        const double residual = (w - rho * v).norm();
        if (it > 1 && std::abs(rho - previous) < opt.tolerance * rho) {
            settled = true;
        }
        previous = rho;

        if (residual < best.residual) {
            const double sigma = z.norm();
            best.sigma = sigma;
            best.u = z / sigma;
            best.v = v;
            best.iterations = it;
            best.residual = residual;
            stall = 0;
        } else {
            ++stall;
        }

        if (settled && (residual <= opt.residual_tolerance * rho || stall >= opt.stagnation_window)) {
            fix_sign(best);
            best.iterations = it;
            state.computed.push_back(std::move(best));
            return state.computed.back();
        }
        v = w / w_norm;
    }
    fix_sign(best);
    throw ConvergenceError("next_triplet: no convergence within " +
                               std::to_string(opt.max_iterations) + " iterations",
                           std::move(best));
}

namespace {

class TripletSource final : public CoefficientSource {
public:
    TripletSource(const MatrixOperator& a, const Eigen::VectorXd& y_raw,
                  const LazySolveOptions& options, DeflationState& state,
                  std::vector<double>& coefficients)
        : a_(a), y_raw_(y_raw), options_(options), state_(state), coefficients_(coefficients)
    {
        CompensatedSum s;
        for (Eigen::Index i = 0; i < y_raw.size(); ++i) {
            s.add(y_raw[i] * y_raw[i]);
        }
        norm_sq_ = s.value();
    }

    std::size_t dimension() const override { return a_.cols(); }
    double norm_sq() const override { return norm_sq_; }

    std::optional<Coefficient> next() override
    {
        const std::size_t k = state_.computed.size();
        if (k >= a_.cols()) {
            return std::nullopt;
        }
        if (options_.triplet_budget && k >= *options_.triplet_budget) {
            throw BudgetExceeded("sequential_solve: stopping rule needs more than " +
                                     std::to_string(*options_.triplet_budget) + " triplets",
                                 state_, coefficients_);
        }
        const SingularTriplet& t = next_triplet(state_, a_, options_.seed);
        const double y = t.u.dot(y_raw_);
        coefficients_.push_back(y);
        return Coefficient{k + 1, y};
    }

private:
    const MatrixOperator& a_;
    const Eigen::VectorXd& y_raw_;
    const LazySolveOptions& options_;
    DeflationState& state_;
    std::vector<double>& coefficients_;
    double norm_sq_ = 0.0;
};

}  // namespace

LazySolveResult sequential_solve(const MatrixOperator& a, const Eigen::VectorXd& y_raw,
                                 const NoiseModel& noise, const StoppingConfig& config,
                                 const LazySolveOptions& options)
{
    if (static_cast<std::size_t>(y_raw.size()) != a.rows()) {
        throw DimensionMismatch("sequential_solve: y_raw must have length P");
    }
    noise.validate();
    LazySolveResult result;
    result.state.options = options.power;
    TripletSource source(a, y_raw, options, result.state, result.coefficients);
    result.outcome = early_stop(source, config);

    std::size_t keep = result.outcome.tau;
    if (options.two_step) {
        if (result.outcome.tau <= config.m0) {
            std::vector<double> sigmas;
            for (const auto& t : result.state.computed) {
                sigmas.push_back(t.sigma);
            }
            keep = aic_select(result.coefficients, sigmas, noise.delta, config.m0,
                              config.aic_norm, config.aic_penalty);
        }
        result.outcome.rho = keep;
    }

    std::vector<double> mu(a.cols(), 0.0);
    for (std::size_t i = 0; i < keep; ++i) {
        const SingularTriplet& t = result.state.computed[i];
        const double c = result.coefficients[i] / t.sigma;
        for (std::size_t j = 0; j < mu.size(); ++j) {
            mu[j] += c * t.v[static_cast<Eigen::Index>(j)];
        }
    }
    result.estimate = EstimateVector{std::move(mu), TruncationIndex(static_cast<double>(keep))};
    result.matvec_count = result.state.matvec_count;
    result.triplets_computed = result.state.computed.size();
    for (const auto& t : result.state.computed) {
        result.sigmas.push_back(t.sigma);
    }
    return result;
}

}  // namespace tsvd
