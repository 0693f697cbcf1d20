#pragma once

// The discretized inverse problem in SVD coordinates:
//     Y_i = lambda_i * mu_i + delta * eps_i,   i = 1..D,
// with non-increasing singular values lambda_i > 0. Vectors are stored
// 0-based; index i in the comments below is 1-based.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace tsvd {

/// Polynomial spectral decay PSD(p, C_A): C_A^{-1} i^{-p} <= lambda_i <= C_A i^{-p}.
struct DecayCertificate {
    double p = 0.0;
    double c_a = 1.0;
};

class Spectrum {
public:
    /// Throws InvalidArgument unless the values are strictly positive and
    /// non-increasing, and (when given) the certificate holds for every i.
    explicit Spectrum(std::vector<double> values,
                      std::optional<DecayCertificate> certificate = std::nullopt);

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    std::span<const double> values() const noexcept { return values_; }
    const std::optional<DecayCertificate>& decay_certificate() const noexcept
    {
        return certificate_;
    }

    /// Pure predicate: does PSD(p, c_a) hold on the stored values?
    bool satisfies_decay(double p, double c_a) const noexcept;

private:
    std::vector<double> values_;
    std::optional<DecayCertificate> certificate_;
};

class Signal {
public:
    Signal() = default;
    explicit Signal(std::vector<double> coefficients) : coefficients_(std::move(coefficients)) {}

    static Signal zero(std::size_t dimension) { return Signal(std::vector<double>(dimension, 0.0)); }

    std::size_t size() const noexcept { return coefficients_.size(); }
    double operator[](std::size_t i) const noexcept { return coefficients_[i]; }
    std::span<const double> coefficients() const noexcept { return coefficients_; }

private:
    std::vector<double> coefficients_;
};

enum class NoiseKind {
    gaussian,
    /// Symmetric +-1 draws: bounded, sub-Gaussian, unit variance.
    rademacher,
};

struct NoiseModel {
    /// Noise level. Zero is admitted for deterministic diagnostics only.
    double delta = 1.0;
    NoiseKind kind = NoiseKind::gaussian;

    void validate() const;
};

struct Observation {
    std::vector<double> y;
    double y_norm_sq = 0.0;
    double delta = 1.0;
    /// The standardized noise draw; present for simulated observations only.
    std::optional<std::vector<double>> noise;
    std::optional<std::uint64_t> seed;

    std::size_t size() const noexcept { return y.size(); }

    /// Wraps observed data (no retained noise); computes ||Y||^2.
    static Observation from_data(std::vector<double> y, double delta);
};

/// The ellipsoid H^beta(R, D) = { mu : sum_i i^{2 beta} mu_i^2 <= R^2 }.
struct SobolevClass {
    double beta = 0.0;
    double radius = 1.0;

    void validate() const;
    bool contains(const Signal& signal) const;
};

/// lambda_i = i^{-p}, certified PSD(p, 1).
Spectrum make_polynomial_spectrum(std::size_t dimension, double p);

/// Y_i = lambda_i mu_i + delta eps_i with eps drawn from RandomStream(seed).
Observation simulate_observation(const Signal& signal, const Spectrum& spectrum,
                                 const NoiseModel& noise, std::uint64_t seed);

/// sum_i lambda_i^2 v_i^2, the squared prediction norm ||A v||^2.
double weak_norm_sq(std::span<const double> v, const Spectrum& spectrum);

/// (sum_i i^{2 beta} mu_i^2)^{1/2}
double sobolev_radius(const Signal& signal, double beta);

/// Reads one real per line (blank lines and lines starting with '#' skipped).
std::vector<double> load_column_file(const std::filesystem::path& path);

}  // namespace tsvd
