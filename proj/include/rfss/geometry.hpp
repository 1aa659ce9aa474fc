// SPDX-License-Identifier: Apache-2.0

#ifndef RFSS_GEOMETRY_HPP
#define RFSS_GEOMETRY_HPP

#include <cmath>
#include <numbers>

namespace rfss {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(const Vec3 &o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3 &o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3 &operator+=(const Vec3 &o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    constexpr bool operator==(const Vec3 &o) const { return x == o.x && y == o.y && z == o.z; }

    constexpr double dot(const Vec3 &o) const { return x * o.x + y * o.y + z * o.z; }
    constexpr Vec3 cross(const Vec3 &o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    constexpr double squared_norm() const { return dot(*this); }
    Vec3 normalized() const {
        const double n = norm();
        return {x / n, y / n, z / n};
    }
};

constexpr Vec3 operator*(double s, const Vec3 &v) { return v * s; }

inline double distance(const Vec3 &a, const Vec3 &b) { return (a - b).norm(); }

// Orthonormal in-plane frame (u, v) for a unit normal n, derived deterministically:
// u is the reference axis projected into the plane, v = n x u. For n = +z this
// yields u = +x, v = +y.
struct PlaneFrame {
    Vec3 u;
    Vec3 v;
};

inline PlaneFrame plane_frame(const Vec3 &unit_normal) {
    const Vec3 ref = std::abs(unit_normal.x) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
    const Vec3 u = (ref - unit_normal * ref.dot(unit_normal)).normalized();
    return {u, unit_normal.cross(u)};
}

// Mirror image of p across the plane through p0 with unit normal n.
inline Vec3 mirror_point(const Vec3 &p, const Vec3 &p0, const Vec3 &n) {
    return p - n * (2.0 * (p - p0).dot(n));
}

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

} // namespace rfss

#endif
