#include "tsvd/sequence_model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "tsvd/error.hpp"
#include "tsvd/numeric.hpp"
#include "tsvd/rng.hpp"

namespace tsvd {

Spectrum::Spectrum(std::vector<double> values, std::optional<DecayCertificate> certificate)
    : values_(std::move(values)), certificate_(certificate)
{
    if (values_.empty()) {
        throw InvalidArgument("spectrum: dimension must be at least 1");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!(values_[i] > 0.0) || !std::isfinite(values_[i])) {
            throw InvalidArgument("spectrum: singular values must be finite and strictly positive");
        }
        if (i > 0 && values_[i] > values_[i - 1]) {
            throw InvalidArgument("spectrum: singular values must be non-increasing");
        }
    }
    if (certificate_) {
        if (certificate_->p < 0.0 || certificate_->c_a < 1.0) {
            throw InvalidArgument("spectrum: decay certificate needs p >= 0 and C_A >= 1");
        }
        if (!satisfies_decay(certificate_->p, certificate_->c_a)) {
            throw InvalidArgument("spectrum: values violate the stated decay certificate");
        }
    }
}

bool Spectrum::satisfies_decay(double p, double c_a) const noexcept
{
    // relative slack of a few ulps so that make_polynomial_spectrum certifies itself
    constexpr double slack = 1e-12;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const double reference = std::pow(static_cast<double>(i + 1), -p);
        if (values_[i] < reference / c_a * (1.0 - slack) ||
            values_[i] > reference * c_a * (1.0 + slack)) {
            return false;
        }
    }
    return true;
}

void NoiseModel::validate() const
{
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
        throw InvalidArgument("noise: delta must be finite and non-negative");
    }
}

Observation Observation::from_data(std::vector<double> y, double delta)
{
    Observation obs;
    obs.y_norm_sq = sum_of_squares(y);
    obs.y = std::move(y);
    obs.delta = delta;
    return obs;
}

void SobolevClass::validate() const
{
    if (!(beta >= 0.0)) {
        throw InvalidArgument("sobolev class: beta must be non-negative");
    }
    if (!(radius > 0.0)) {
        throw InvalidArgument("sobolev class: radius must be positive");
    }
}

bool SobolevClass::contains(const Signal& signal) const
{
    validate();
    return sobolev_radius(signal, beta) <= radius;
}

Spectrum make_polynomial_spectrum(std::size_t dimension, double p)
{
    if (dimension == 0) {
        throw InvalidArgument("make_polynomial_spectrum: dimension must be at least 1");
    }
    if (!(p >= 0.0)) {
        throw InvalidArgument("make_polynomial_spectrum: p must be non-negative");
    }
    std::vector<double> values(dimension);
    for (std::size_t i = 0; i < dimension; ++i) {
        values[i] = std::pow(static_cast<double>(i + 1), -p);
    }
    return Spectrum(std::move(values), DecayCertificate{p, 1.0});
}

Observation simulate_observation(const Signal& signal, const Spectrum& spectrum,
                                 const NoiseModel& noise, std::uint64_t seed)
{
    if (signal.size() != spectrum.size()) {
        throw DimensionMismatch("simulate_observation: signal and spectrum lengths differ");
    }
    noise.validate();
    const std::size_t d = spectrum.size();
    RandomStream rng(seed);
    std::vector<double> eps(d);
    std::vector<double> y(d);
    for (std::size_t i = 0; i < d; ++i) {
        eps[i] = noise.kind == NoiseKind::gaussian ? rng.gaussian() : rng.rademacher();
        y[i] = spectrum[i] * signal[i] + noise.delta * eps[i];
    }
    Observation obs = Observation::from_data(std::move(y), noise.delta);
    obs.noise = std::move(eps);
    obs.seed = seed;
    return obs;
}

double weak_norm_sq(std::span<const double> v, const Spectrum& spectrum)
{
    if (v.size() != spectrum.size()) {
        throw DimensionMismatch("weak_norm_sq: vector and spectrum lengths differ");
    }
    CompensatedSum s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double w = spectrum[i] * v[i];
        s.add(w * w);
    }
    return s.value();
}

double sobolev_radius(const Signal& signal, double beta)
{
    if (!(beta >= 0.0)) {
        throw InvalidArgument("sobolev_radius: beta must be non-negative");
    }
    CompensatedSum s;
    for (std::size_t i = 0; i < signal.size(); ++i) {
        const double w = std::pow(static_cast<double>(i + 1), beta) * signal[i];
        s.add(w * w);
    }
    return std::sqrt(s.value());
}

std::vector<double> load_column_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("cannot open vector file: " + path.string());
    }
    std::vector<double> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        std::istringstream iss(line);
        double value = 0.0;
        if (!(iss >> value)) {
            throw InvalidArgument(path.string() + ":" + std::to_string(line_no) +
                                  ": expected one real number per line");
        }
        out.push_back(value);
    }
    return out;
}

}  // namespace tsvd
