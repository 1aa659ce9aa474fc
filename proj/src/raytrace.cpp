// SPDX-License-Identifier: Apache-2.0

#include "rfss/raytrace.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "rfss/errors.hpp"
#include "rfss/rng.hpp"

namespace rfss::raytrace {
namespace {

constexpr double kEdgeGrace = 1e-9;  // meters

struct ExtentOffsets {
    double du;
    double dv;
};

ExtentOffsets in_plane_offsets(const Reflector &r, const Vec3 &p) {
    const PlaneFrame f = r.frame();
    const Vec3 rel = p - r.point;
    return {rel.dot(f.u), rel.dot(f.v)};
}

// Interaction points may sit on the extent boundary.
bool within_extent(const Reflector &r, const Vec3 &p) {
    const ExtentOffsets o = in_plane_offsets(r, p);
    return std::abs(o.du) <= r.half_width_u + kEdgeGrace &&
           std::abs(o.dv) <= r.half_width_v + kEdgeGrace;
}

// Occlusion uses the rectangle shrunk by the grace margin, so a grazing
// segment passes.
bool within_blocking_extent(const Reflector &r, const Vec3 &p) {
    const ExtentOffsets o = in_plane_offsets(r, p);
    return std::abs(o.du) < r.half_width_u - kEdgeGrace &&
           std::abs(o.dv) < r.half_width_v - kEdgeGrace;
}

// A reflector blocks a segment when the segment crosses it front-to-back
// inside the blocking extent. Hits within the grace margin of either segment
// endpoint are ignored (they are the segment's own interaction points).
bool segment_blocked_by(const Reflector &r, const Vec3 &a, const Vec3 &b) {
    const double side_a = r.side(a);
    const double side_b = r.side(b);
    if (!(side_a > 0.0 && side_b < 0.0))
        return false;
    const double t = side_a / (side_a - side_b);
    const Vec3 hit = a + (b - a) * t;
    if (distance(hit, a) <= kEdgeGrace || distance(hit, b) <= kEdgeGrace)
        return false;
    return within_blocking_extent(r, hit);
}

bool segment_unoccluded(const Scene &scene, const Vec3 &a, const Vec3 &b) {
    for (const Reflector &r : scene.reflectors)
        if (segment_blocked_by(r, a, b))
            return false;
    return true;
}

// Separating-axis test between the rectangle and the bounding box; infinite
// half-widths are capped at a span larger than the box diagonal.
bool rectangle_intersects_box(const Reflector &r, const Vec3 &box_min, const Vec3 &box_max) {
    const Vec3 box_center = (box_min + box_max) * 0.5;
    const Vec3 box_half = (box_max - box_min) * 0.5;
    const double cap = 4.0 * (box_max - box_min).norm() + 1.0;
    const double hu = std::min(r.half_width_u, cap);
    const double hv = std::min(r.half_width_v, cap);
    const PlaneFrame f = r.frame();

    const auto separated = [&](const Vec3 &axis) {
        const double len = axis.norm();
        if (len < 1e-12)
            return false;
        const Vec3 l = axis / len;
        const double rect_radius = hu * std::abs(f.u.dot(l)) + hv * std::abs(f.v.dot(l));
        const double box_radius = box_half.x * std::abs(l.x) + box_half.y * std::abs(l.y) +
                                  box_half.z * std::abs(l.z);
        const double dist = std::abs((r.point - box_center).dot(l));
        return dist > rect_radius + box_radius + 1e-12;
    };

    const Vec3 box_axes[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (const Vec3 &a : box_axes)
        if (separated(a))
            return false;
    if (separated(r.normal))
        return false;
    for (const Vec3 &rect_axis : {f.u, f.v})
        for (const Vec3 &box_axis : box_axes)
            if (separated(rect_axis.cross(box_axis)))
                return false;
    return true;
}

// Ordered reflector-index sequences of the given length with no immediate
// repeats, visited lexicographically.
void for_each_sequence(std::size_t reflector_count, std::size_t length,
                       std::vector<std::size_t> &seq,
                       const std::function<void(const std::vector<std::size_t> &)> &fn) {
    if (seq.size() == length) {
        fn(seq);
        return;
    }
    for (std::size_t i = 0; i < reflector_count; ++i) {
        if (!seq.empty() && seq.back() == i)
            continue;
        seq.push_back(i);
        for_each_sequence(reflector_count, length, seq, fn);
        seq.pop_back();
    }
}

} // namespace

void Reflector::validate() const {
    if (std::abs(normal.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("Reflector: normal must be unit length");
    if (std::abs(reflection_coeff) > 1.0 + 1e-12)
        throw std::invalid_argument("Reflector: |reflection coefficient| must be <= 1");
    if (!(half_width_u > 0.0) || !(half_width_v > 0.0))
        throw std::invalid_argument("Reflector: half-widths must be positive");
}

bool Scene::inside_box(const Vec3 &p) const {
    return p.x >= box_min.x && p.x <= box_max.x && p.y >= box_min.y && p.y <= box_max.y &&
           p.z >= box_min.z && p.z <= box_max.z;
}

void Scene::validate() const {
    for (std::size_t i = 0; i < reflectors.size(); ++i) {
        reflectors[i].validate();
        if (!rectangle_intersects_box(reflectors[i], box_min, box_max))
            throw std::invalid_argument("Scene: reflector " + std::to_string(i) +
                                        " does not intersect the bounding box");
    }
    if (!inside_box(receiver_pos))
        throw std::invalid_argument("Scene: receiver must lie inside the bounding box");
    array.validate();
}

std::complex<double> path_gain(double length_m,
                               const std::vector<std::complex<double>> &bounce_coeffs,
                               const RFParams &rf) {
    if (!(length_m > 0.0))
        throw DomainError("path_gain: path length must be positive");
    std::complex<double> gain{1.0, 0.0};
    for (const std::complex<double> &c : bounce_coeffs)
        gain *= c;
    const double spreading = rf.wavelength_m / (4.0 * std::numbers::pi * length_m);
    const double phase = -2.0 * std::numbers::pi * rf.frequency_hz * length_m / rf.speed_of_light;
    return gain * spreading * std::polar(1.0, phase);
}

std::vector<PropagationPath> enumerate_paths(const Scene &scene, const Vec3 &tx,
                                             std::size_t max_order) {
    scene.validate();
    const Vec3 rx = scene.receiver_pos;
    if (distance(tx, rx) < 1e-12)
        throw DomainError("enumerate_paths: transmitter coincides with receiver");
    if (!scene.inside_box(tx))
        throw DomainError("enumerate_paths: transmitter outside the bounding box");

    std::vector<PropagationPath> paths;

    if (segment_unoccluded(scene, tx, rx)) {
        PropagationPath los;
        los.length_m = distance(tx, rx);
        los.gain = path_gain(los.length_m, {}, scene.rf);
        paths.push_back(std::move(los));
    }

    std::vector<std::size_t> seq;
    const auto try_sequence = [&](const std::vector<std::size_t> &walls) {
        const std::size_t k = walls.size();

        // Unfolded image chain: images[i] is tx mirrored across the first i walls.
        std::vector<Vec3> images(k + 1);
        images[0] = tx;
        for (std::size_t i = 0; i < k; ++i) {
            const Reflector &r = scene.reflectors[walls[i]];
            images[i + 1] = mirror_point(images[i], r.point, r.normal);
        }

        // Backtrack from the receiver: each interaction point is where the
        // segment toward the current image crosses its wall.
        std::vector<Vec3> pts(k);
        Vec3 target = rx;
        for (std::size_t i = k; i-- > 0;) {
            const Reflector &r = scene.reflectors[walls[i]];
            const double side_target = r.side(target);
            const double side_image = r.side(images[i + 1]);
            if (!(side_target > 0.0) || !(side_image < 0.0))
                return; // target must see the wall's reflective face
            const double denom = side_target - side_image;
            if (denom < 1e-15)
                return;
            const double t = side_target / denom;
            pts[i] = target + (images[i + 1] - target) * t;
            if (!within_extent(r, pts[i]))
                return;
            target = pts[i];
        }

        // Every real segment must be clear of other reflectors.
        Vec3 prev = tx;
        for (std::size_t i = 0; i < k; ++i) {
            if (!segment_unoccluded(scene, prev, pts[i]))
                return;
            prev = pts[i];
        }
        if (!segment_unoccluded(scene, prev, rx))
            return;

        PropagationPath path;
        path.points = pts;
        path.reflector_ids = walls;
        prev = tx;
        for (const Vec3 &p : pts) {
            path.length_m += distance(prev, p);
            prev = p;
        }
        path.length_m += distance(prev, rx);

        std::vector<std::complex<double>> coeffs;
        coeffs.reserve(k);
        for (std::size_t w : walls)
            coeffs.push_back(scene.reflectors[w].reflection_coeff);
        path.gain = path_gain(path.length_m, coeffs, scene.rf);
        paths.push_back(std::move(path));
    };

    for (std::size_t order = 1; order <= max_order; ++order)
        for_each_sequence(scene.reflectors.size(), order, seq, try_sequence);

    std::stable_sort(paths.begin(), paths.end(),
                     [](const PropagationPath &a, const PropagationPath &b) {
                         if (a.order() != b.order())
                             return a.order() < b.order();
                         return a.length_m < b.length_m;
                     });
    return paths;
}

Grid simulate_spectrum(const Scene &scene, const Vec3 &tx, std::size_t max_order) {
    const std::vector<PropagationPath> paths = enumerate_paths(scene, tx, max_order);
    const PlaneFrame frame = plane_frame(scene.array.normal);
    const Vec3 rx = scene.receiver_pos;

    std::vector<channel::Arrival> arrivals;
    arrivals.reserve(paths.size());
    for (const PropagationPath &path : paths) {
        const Vec3 source = path.points.empty() ? tx : path.points.back();
        const Vec3 u = (source - rx).normalized();
        const double up = std::clamp(u.dot(scene.array.normal), -1.0, 1.0);
        const double beta = rad_to_deg(std::asin(up));
        if (beta < 0.0)
            continue; // below the array plane
        double alpha = rad_to_deg(std::atan2(u.dot(frame.v), u.dot(frame.u)));
        if (alpha < 0.0)
            alpha += 360.0;
        if (alpha >= 360.0)
            alpha = 0.0;
        arrivals.push_back(
            {std::abs(path.gain), std::arg(path.gain), Direction(alpha, beta)});
    }
    const channel::ReceivedMatrix y = channel::received_matrix(arrivals, scene.array, scene.rf);
    return channel::spatial_spectrum(y, scene.array, scene.rf);
}

double reflection_point_distance(const PropagationPath &a, const PropagationPath &b) {
    if (a.order() == 0 || a.order() != b.order())
        throw DomainError("reflection_point_distance: paths must share an order >= 1");
    if (a.reflector_ids != b.reflector_ids)
        throw DomainError("reflection_point_distance: paths hit different reflector sequences");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.points.size(); ++i)
        worst = std::max(worst, distance(a.points[i], b.points[i]));
    return worst;
}

void add_receiver_noise(channel::ReceivedMatrix &y, double snr_db, std::uint64_t seed) {
    double signal_power = 0.0;
    for (const std::complex<double> &s : y.samples)
        signal_power += std::norm(s);
    signal_power /= static_cast<double>(y.samples.size());
    if (signal_power <= 0.0)
        return;

    const double noise_var = signal_power / std::pow(10.0, snr_db / 10.0);
    const double sigma = std::sqrt(noise_var / 2.0);
    SplitMix64 rng(seed);
    for (std::complex<double> &s : y.samples)
        s += std::complex<double>(sigma * rng.normal(), sigma * rng.normal());
}

} // namespace rfss::raytrace
