// SPDX-License-Identifier: Apache-2.0
//
// Deterministic image-method multipath simulator for box scenes with planar
// rectangular reflectors. Enumerates the line-of-sight path plus all specular
// reflection paths up to a bounce limit and renders the resulting spatial
// spectrum at the receiver array.

#ifndef RFSS_RAYTRACE_HPP
#define RFSS_RAYTRACE_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "rfss/channel.hpp"
#include "rfss/geometry.hpp"
#include "rfss/grid.hpp"

namespace rfss::raytrace {

// One-sided planar rectangle. The in-plane axes are derived deterministically
// from the normal (see plane_frame); half_width_u / half_width_v bound the
// extent along them and may be infinite.
struct Reflector {
    Vec3 point{};                                 // rectangle center
    Vec3 normal{0.0, 0.0, 1.0};                   // unit, faces the reflective side
    std::complex<double> reflection_coeff{0, 0};  // |gamma| <= 1
    double half_width_u = 0.0;
    double half_width_v = 0.0;

    PlaneFrame frame() const { return plane_frame(normal); }
    void validate() const;

    // Signed distance of p from the plane, positive on the reflective side.
    double side(const Vec3 &p) const { return (p - point).dot(normal); }
};

struct Scene {
    std::vector<Reflector> reflectors;
    Vec3 receiver_pos{};
    channel::ArrayGeometry array;
    RFParams rf;
    Vec3 box_min{};
    Vec3 box_max{};
    std::uint64_t seed = 0;
    std::uint64_t scene_hash = 0; // digest of the canonical scene text, 0 if built in code

    void validate() const;
    bool inside_box(const Vec3 &p) const;
};

struct PropagationPath {
    std::vector<Vec3> points;              // ordered interaction points, empty for LoS
    std::vector<std::size_t> reflector_ids; // parallel to points
    double length_m = 0.0;                 // sum of segment lengths
    std::complex<double> gain{0.0, 0.0};

    std::size_t order() const { return points.size(); }
};

// Product of per-bounce reflection coefficients times the free-space factor
// lambda/(4 pi d) e^{-j 2 pi f d / c}.
std::complex<double> path_gain(double length_m,
                               const std::vector<std::complex<double>> &bounce_coeffs,
                               const RFParams &rf);

// All unoccluded paths from tx to the scene receiver with at most max_order
// bounces, constructed by the mirror-image method; sorted by (order, length).
std::vector<PropagationPath> enumerate_paths(const Scene &scene, const Vec3 &tx,
                                             std::size_t max_order);

// Composition: enumerate paths, beamform the resulting arrivals. Paths
// arriving from below the array plane are discarded.
Grid simulate_spectrum(const Scene &scene, const Vec3 &tx, std::size_t max_order);

// Maximum distance between corresponding interaction points of two paths
// matched by (order, reflector identity sequence).
double reflection_point_distance(const PropagationPath &a, const PropagationPath &b);

// Additive complex Gaussian noise at the given SNR relative to the mean
// element power; seeded and off by default in all pipelines.
void add_receiver_noise(channel::ReceivedMatrix &y, double snr_db, std::uint64_t seed);

} // namespace rfss::raytrace

#endif
