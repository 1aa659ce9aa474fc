// SPDX-License-Identifier: Apache-2.0
//
// Antenna-array wireless channel model and beamformed spatial-spectrum
// computation. A received snapshot of an M x N array is scanned over the
// upper hemisphere at one-degree resolution to produce the 360 x 90 power
// spectrum.

#ifndef RFSS_CHANNEL_HPP
#define RFSS_CHANNEL_HPP

#include <complex>
#include <cstddef>
#include <vector>

#include "rfss/geometry.hpp"
#include "rfss/grid.hpp"

namespace rfss {

inline constexpr double kSpeedOfLight = 299792458.0; // m/s

struct RFParams {
    double frequency_hz = 0.0;
    double wavelength_m = 0.0;
    double speed_of_light = kSpeedOfLight;

    static RFParams from_frequency(double frequency_hz);

    double wavenumber() const { return 2.0 * std::numbers::pi / wavelength_m; }
};

// Arrival direction at the receiver. Azimuth in [0, 360), elevation measured
// from the array plane in [0, 90]; both continuous degrees.
struct Direction {
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;

    Direction() = default;
    Direction(double azimuth, double elevation);
};

namespace channel {

inline constexpr std::size_t kAzimuthCells = 360;
inline constexpr std::size_t kElevationCells = 90;

struct ArrayGeometry {
    std::size_t rows = 1; // M
    std::size_t cols = 1; // N
    double spacing_m = 0.0;
    Vec3 origin{};
    Vec3 normal{0.0, 0.0, 1.0}; // boresight, unit length

    // M x N array with the conventional half-wavelength element spacing.
    static ArrayGeometry half_wavelength(std::size_t rows, std::size_t cols, const RFParams &rf,
                                         Vec3 origin = {}, Vec3 normal = {0.0, 0.0, 1.0});

    void validate() const;
};

struct Arrival {
    double amplitude = 0.0; // A * A_att
    double phase_rad = 0.0; // psi + delta-psi
    Direction direction;
};

struct ReceivedMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::complex<double>> samples; // row-major, index m * cols + n

    std::complex<double> &at(std::size_t m, std::size_t n) { return samples[m * cols + n]; }
    std::complex<double> at(std::size_t m, std::size_t n) const { return samples[m * cols + n]; }
};

// Geometric phase shift of element (m, n) for a wave from `dir`:
//   (2*pi/lambda) * d * sin(beta) * (m*cos(alpha) + n*sin(alpha)).
double steering_phase(std::size_t m, std::size_t n, const Direction &dir, const RFParams &rf,
                      const ArrayGeometry &geom);

// Superposition of plane-wave arrivals: y_mn = sum_k A_k e^{j(phase_k + steering)}.
ReceivedMatrix received_matrix(const std::vector<Arrival> &arrivals, const ArrayGeometry &geom,
                               const RFParams &rf);

// Beamformed power |sum_mn y_mn e^{-j steering(alpha,beta)}|^2 on the
// one-degree grid, cell (p, q) evaluated at exactly alpha = p deg, beta = q deg.
Grid spatial_spectrum(const ReceivedMatrix &y, const ArrayGeometry &geom, const RFParams &rf);

// Grid cell of maximum power; ties go to the smallest azimuth, then elevation.
Direction spectrum_argmax(const Grid &spectrum);

// Unit vector of a direction in the frame (ex, ey, ez): elevation from the
// ex-ey plane, azimuth from ex toward ey.
Vec3 direction_to_unit(const Direction &dir);

} // namespace channel
} // namespace rfss

#endif
