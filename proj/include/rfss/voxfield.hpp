// SPDX-License-Identifier: Apache-2.0
//
// Volumetric ray aggregation: the real-valued transmittance accumulation and
// the complex-valued received-signal formula with spherical spreading and
// propagation phase, both over externally supplied per-sample attributes.

#ifndef RFSS_VOXFIELD_HPP
#define RFSS_VOXFIELD_HPP

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "rfss/channel.hpp"
#include "rfss/geometry.hpp"

namespace rfss::voxfield {

enum class SampleMode { real, complex };

// Attributes of S samples along one ray. Arrays are sized S in both modes;
// the last attenuation entry (delta[S-1] / atten[S-1]) never enters the
// running product, which only covers samples in front of the emitter.
struct VoxelSamples {
    SampleMode mode = SampleMode::real;

    // real mode
    std::vector<double> delta; // attenuation exponents, each <= 0
    std::vector<double> xi;    // emission

    // complex mode
    std::vector<std::complex<double>> signal; // s_s
    std::vector<std::complex<double>> atten;  // a_s
    std::vector<double> dist_m;               // d_s > 0, sample-to-receiver distance

    std::size_t count() const { return mode == SampleMode::real ? xi.size() : signal.size(); }

    static VoxelSamples make_real(std::vector<double> delta, std::vector<double> xi);
    static VoxelSamples make_complex(std::vector<std::complex<double>> signal,
                                     std::vector<std::complex<double>> atten,
                                     std::vector<double> dist_m);
};

// sum_i exp(sum_{j<i} delta_j) * xi_i, front-to-back with compensated
// accumulation.
double aggregate_real(const VoxelSamples &v);

// sum_s (prod_{j<s} a_j) * s_s * lambda/(4 pi d_s) * e^{-j 2 pi f d_s / c}.
std::complex<double> aggregate_complex(const VoxelSamples &v, const RFParams &rf);

// Diagnostic variant that drops the propagation phase term, isolating the
// 1/d amplitude behaviour.
std::complex<double> aggregate_complex_zero_phase(const VoxelSamples &v, const RFParams &rf);

struct RaySampling {
    Vec3 origin{};
    Direction direction;
    std::size_t count = 1;  // S
    double t_max_m = 1.0;

    void validate() const;
};

// S midpoint samples at t = t_max * (s - 1/2) / S; second member is the
// distance of the sample to the origin.
std::vector<std::pair<Vec3, double>> sample_ray(const RaySampling &ray);

} // namespace rfss::voxfield

#endif
