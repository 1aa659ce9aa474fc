// SPDX-License-Identifier: Apache-2.0

#include "rfss/voxfield.hpp"

#include <cmath>
#include <stdexcept>

#include "rfss/errors.hpp"

namespace rfss::voxfield {
namespace {

// Kahan-style compensated accumulator; summation order stays front-to-back.
struct Compensated {
    double sum = 0.0;
    double carry = 0.0;

    void add(double value) {
        const double y = value - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

void require_mode(const VoxelSamples &v, SampleMode expected, const char *op) {
    if (v.mode != expected)
        throw std::invalid_argument(std::string(op) + ": sample mode mismatch");
}

std::complex<double> aggregate_complex_impl(const VoxelSamples &v, const RFParams &rf,
                                            bool with_phase) {
    require_mode(v, SampleMode::complex, "aggregate_complex");
    const std::size_t count = v.signal.size();
    const double omega = 2.0 * std::numbers::pi * rf.frequency_hz / rf.speed_of_light;

    Compensated re, im;
    std::complex<double> transmit{1.0, 0.0}; // prod_{j<s} a_j
    for (std::size_t s = 0; s < count; ++s) {
        const double d = v.dist_m[s];
        if (!(d > 0.0))
            throw DomainError("aggregate_complex: sample distance must be positive");
        const double spreading = rf.wavelength_m / (4.0 * std::numbers::pi * d);
        std::complex<double> term = transmit * v.signal[s] * spreading;
        if (with_phase)
            term *= std::polar(1.0, -omega * d);
        re.add(term.real());
        im.add(term.imag());
        transmit *= v.atten[s];
    }
    return {re.sum, im.sum};
}

} // namespace

VoxelSamples VoxelSamples::make_real(std::vector<double> delta, std::vector<double> xi) {
    if (xi.empty())
        throw std::invalid_argument("VoxelSamples: need at least one sample");
    if (delta.size() != xi.size())
        throw std::invalid_argument("VoxelSamples: delta and xi must both be sized S");
    for (double d : delta)
        if (!(d <= 0.0))
            throw std::invalid_argument("VoxelSamples: attenuation exponents must be <= 0");
    VoxelSamples v;
    v.mode = SampleMode::real;
    v.delta = std::move(delta);
    v.xi = std::move(xi);
    return v;
}

VoxelSamples VoxelSamples::make_complex(std::vector<std::complex<double>> signal,
                                        std::vector<std::complex<double>> atten,
                                        std::vector<double> dist_m) {
    if (signal.empty())
        throw std::invalid_argument("VoxelSamples: need at least one sample");
    if (atten.size() != signal.size() || dist_m.size() != signal.size())
        throw std::invalid_argument("VoxelSamples: all attribute arrays must be sized S");
    for (double d : dist_m)
        if (!(d > 0.0))
            throw DomainError("VoxelSamples: sample distances must be positive");
    VoxelSamples v;
    v.mode = SampleMode::complex;
    v.signal = std::move(signal);
    v.atten = std::move(atten);
    v.dist_m = std::move(dist_m);
    return v;
}

double aggregate_real(const VoxelSamples &v) {
    require_mode(v, SampleMode::real, "aggregate_real");
    Compensated acc;
    double exponent = 0.0; // running prefix sum of delta
    for (std::size_t i = 0; i < v.xi.size(); ++i) {
        acc.add(std::exp(exponent) * v.xi[i]);
        exponent += v.delta[i];
    }
    return acc.sum;
}

std::complex<double> aggregate_complex(const VoxelSamples &v, const RFParams &rf) {
    return aggregate_complex_impl(v, rf, true);
}

std::complex<double> aggregate_complex_zero_phase(const VoxelSamples &v, const RFParams &rf) {
    return aggregate_complex_impl(v, rf, false);
}

void RaySampling::validate() const {
    if (count < 1)
        throw std::invalid_argument("RaySampling: need at least one sample");
    if (!(t_max_m > 0.0))
        throw std::invalid_argument("RaySampling: t_max must be positive");
}

std::vector<std::pair<Vec3, double>> sample_ray(const RaySampling &ray) {
    ray.validate();
    const Vec3 unit = channel::direction_to_unit(ray.direction);
    std::vector<std::pair<Vec3, double>> samples;
    samples.reserve(ray.count);
    for (std::size_t s = 1; s <= ray.count; ++s) {
        const double t =
            ray.t_max_m * (static_cast<double>(s) - 0.5) / static_cast<double>(ray.count);
        samples.emplace_back(ray.origin + unit * t, t);
    }
    return samples;
}

} // namespace rfss::voxfield
