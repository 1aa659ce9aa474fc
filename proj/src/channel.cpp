// SPDX-License-Identifier: Apache-2.0

#include "rfss/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace rfss {

RFParams RFParams::from_frequency(double frequency_hz) {
    if (!(frequency_hz > 0.0))
        throw std::invalid_argument("RFParams: frequency must be positive");
    RFParams rf;
    rf.frequency_hz = frequency_hz;
    rf.wavelength_m = kSpeedOfLight / frequency_hz;
    return rf;
}

Direction::Direction(double azimuth, double elevation)
    : azimuth_deg(azimuth), elevation_deg(elevation) {
    if (!(azimuth >= 0.0 && azimuth < 360.0))
        throw std::invalid_argument("Direction: azimuth must lie in [0, 360)");
    if (!(elevation >= 0.0 && elevation <= 90.0))
        throw std::invalid_argument("Direction: elevation must lie in [0, 90]");
}

namespace channel {

ArrayGeometry ArrayGeometry::half_wavelength(std::size_t rows, std::size_t cols,
                                             const RFParams &rf, Vec3 origin, Vec3 normal) {
    ArrayGeometry geom;
    geom.rows = rows;
    geom.cols = cols;
    geom.spacing_m = rf.wavelength_m / 2.0;
    geom.origin = origin;
    geom.normal = normal;
    geom.validate();
    return geom;
}

void ArrayGeometry::validate() const {
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("ArrayGeometry: need at least one element per axis");
    if (!(spacing_m > 0.0))
        throw std::invalid_argument("ArrayGeometry: spacing must be positive");
    if (std::abs(normal.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("ArrayGeometry: normal must be unit length");
}

double steering_phase(std::size_t m, std::size_t n, const Direction &dir, const RFParams &rf,
                      const ArrayGeometry &geom) {
    if (m >= geom.rows || n >= geom.cols)
        throw std::out_of_range("steering_phase: element index out of range");
    const double alpha = deg_to_rad(dir.azimuth_deg);
    const double beta = deg_to_rad(dir.elevation_deg);
    const double k = rf.wavenumber();
    return k * geom.spacing_m * std::sin(beta) *
           (static_cast<double>(m) * std::cos(alpha) + static_cast<double>(n) * std::sin(alpha));
}

ReceivedMatrix received_matrix(const std::vector<Arrival> &arrivals, const ArrayGeometry &geom,
                               const RFParams &rf) {
    geom.validate();
    ReceivedMatrix y;
    y.rows = geom.rows;
    y.cols = geom.cols;
    y.samples.assign(geom.rows * geom.cols, {0.0, 0.0});
    for (const Arrival &a : arrivals) {
        for (std::size_t m = 0; m < geom.rows; ++m) {
            for (std::size_t n = 0; n < geom.cols; ++n) {
                const double phase = a.phase_rad + steering_phase(m, n, a.direction, rf, geom);
                y.at(m, n) += std::polar(a.amplitude, phase);
            }
        }
    }
    return y;
}

Grid spatial_spectrum(const ReceivedMatrix &y, const ArrayGeometry &geom, const RFParams &rf) {
    if (y.rows != geom.rows || y.cols != geom.cols)
        throw std::invalid_argument("spatial_spectrum: matrix shape does not match array");

    Grid spectrum(kAzimuthCells, kElevationCells);
    const double kd = rf.wavenumber() * geom.spacing_m;

    // Per-cell steering phase is m*u + n*v with u, v fixed per direction, so
    // the conjugated phasors are running powers of two unit rotations.
    double cos_alpha[kAzimuthCells], sin_alpha[kAzimuthCells];
    for (std::size_t p = 0; p < kAzimuthCells; ++p) {
        const double alpha = deg_to_rad(static_cast<double>(p));
        cos_alpha[p] = std::cos(alpha);
        sin_alpha[p] = std::sin(alpha);
    }
    double sin_beta[kElevationCells];
    for (std::size_t q = 0; q < kElevationCells; ++q)
        sin_beta[q] = std::sin(deg_to_rad(static_cast<double>(q)));

    for (std::size_t p = 0; p < kAzimuthCells; ++p) {
        for (std::size_t q = 0; q < kElevationCells; ++q) {
            const double u = kd * sin_beta[q] * cos_alpha[p];
            const double v = kd * sin_beta[q] * sin_alpha[p];
            const std::complex<double> eu = std::polar(1.0, -u);
            const std::complex<double> ev = std::polar(1.0, -v);

            std::complex<double> sum{0.0, 0.0};
            std::complex<double> row_phasor{1.0, 0.0}; // e^{-j m u}
            for (std::size_t m = 0; m < y.rows; ++m) {
                std::complex<double> phasor = row_phasor; // e^{-j (m u + n v)}
                for (std::size_t n = 0; n < y.cols; ++n) {
                    sum += y.at(m, n) * phasor;
                    phasor *= ev;
                }
                row_phasor *= eu;
            }
            spectrum(p, q) = std::norm(sum);
        }
    }
    return spectrum;
}

Direction spectrum_argmax(const Grid &spectrum) {
    if (spectrum.empty())
        throw std::invalid_argument("spectrum_argmax: empty spectrum");
    std::size_t best_p = 0, best_q = 0;
    double best = spectrum(0, 0);
    for (std::size_t p = 0; p < spectrum.rows(); ++p) {
        for (std::size_t q = 0; q < spectrum.cols(); ++q) {
            if (spectrum(p, q) > best) {
                best = spectrum(p, q);
                best_p = p;
                best_q = q;
            }
        }
    }
    return Direction(static_cast<double>(best_p), static_cast<double>(best_q));
}

Vec3 direction_to_unit(const Direction &dir) {
    const double alpha = deg_to_rad(dir.azimuth_deg);
    const double beta = deg_to_rad(dir.elevation_deg);
    return {std::cos(beta) * std::cos(alpha), std::cos(beta) * std::sin(alpha), std::sin(beta)};
}

} // namespace channel
} // namespace rfss
