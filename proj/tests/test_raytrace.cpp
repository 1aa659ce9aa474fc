// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rfss/errors.hpp"
#include "rfss/metrics.hpp"
#include "rfss/raytrace.hpp"
#include "rfss/rng.hpp"

using namespace rfss;
using namespace rfss::raytrace;

namespace {

RFParams rf_wifi() { return RFParams::from_frequency(2.412e9); }

Scene empty_scene() {
    Scene scene;
    scene.rf = rf_wifi();
    scene.array = channel::ArrayGeometry::half_wavelength(4, 4, scene.rf);
    scene.box_min = {0, 0, 0};
    scene.box_max = {6, 6, 3};
    scene.receiver_pos = {3.0, 2.6, 0.05};
    scene.array.origin = scene.receiver_pos;
    return scene;
}

Reflector wall(const Vec3 &point, const Vec3 &normal, std::complex<double> gamma,
               double hu = std::numeric_limits<double>::infinity(),
               double hv = std::numeric_limits<double>::infinity()) {
    Reflector r;
    r.point = point;
    r.normal = normal;
    r.reflection_coeff = gamma;
    r.half_width_u = hu;
    r.half_width_v = hv;
    return r;
}

// Six inward-facing walls of the scene box.
Scene box_scene(std::complex<double> gamma, const Vec3 &box_max = {3.0, 3.0, 2.5},
                const Vec3 &rx = {1.5, 1.2, 1.0}) {
    Scene scene;
    scene.rf = rf_wifi();
    scene.array = channel::ArrayGeometry::half_wavelength(4, 4, scene.rf);
    scene.box_min = {0, 0, 0};
    scene.box_max = box_max;
    scene.receiver_pos = rx;
    scene.array.origin = rx;
    const Vec3 c = box_max * 0.5;
    scene.reflectors = {
        wall({0, c.y, c.z}, {1, 0, 0}, gamma, c.y, c.z),
        wall({box_max.x, c.y, c.z}, {-1, 0, 0}, gamma, c.y, c.z),
        wall({c.x, 0, c.z}, {0, 1, 0}, gamma, c.x, c.z),
        wall({c.x, box_max.y, c.z}, {0, -1, 0}, gamma, c.x, c.z),
        wall({c.x, c.y, 0}, {0, 0, 1}, gamma, c.x, c.y),
        wall({c.x, c.y, box_max.z}, {0, 0, -1}, gamma, c.x, c.y),
    };
    return scene;
}

std::vector<double> sorted_lengths(const std::vector<PropagationPath> &paths) {
    std::vector<double> lengths;
    for (const PropagationPath &p : paths)
        lengths.push_back(p.length_m);
    std::sort(lengths.begin(), lengths.end());
    return lengths;
}

} // namespace

TEST_CASE("path gain magnitude follows the friis square root") {
    const RFParams rf = rf_wifi();
    const std::complex<double> gain = path_gain(1.0, {}, rf);
    const double expected = rf.wavelength_m / (4.0 * std::numbers::pi);
    CHECK(std::abs(gain) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::norm(gain) ==
          doctest::Approx(expected * expected).epsilon(1e-12)); // Friis power ratio

    // Absorbing bounce kills the path.
    CHECK(std::abs(path_gain(2.0, {{0.0, 0.0}}, rf)) == 0.0);

    // 1/d amplitude law.
    const double near = std::abs(path_gain(1.7, {}, rf));
    const double far = std::abs(path_gain(3.4, {}, rf));
    CHECK(far * 2.0 == doctest::Approx(near).epsilon(1e-12));

    CHECK_THROWS_AS(path_gain(0.0, {}, rf), DomainError);
    CHECK_THROWS_AS(path_gain(-1.0, {}, rf), DomainError);
}

TEST_CASE("free space yields exactly the line-of-sight path") {
    const Scene scene = empty_scene();
    const Vec3 tx{1.0, 1.0, 2.0};
    const auto paths = enumerate_paths(scene, tx, 2);
    REQUIRE(paths.size() == 1);
    CHECK(paths[0].order() == 0);
    CHECK(paths[0].length_m == doctest::Approx(distance(tx, scene.receiver_pos)).epsilon(1e-15));

    CHECK_THROWS_AS(enumerate_paths(scene, scene.receiver_pos, 1), DomainError);
    CHECK_THROWS_AS(enumerate_paths(scene, {100, 0, 0}, 1), DomainError);
}

TEST_CASE("single wall produces the analytic mirror path") {
    Scene scene = empty_scene();
    scene.reflectors = {wall({0, 3, 1.5}, {1, 0, 0}, {0.8, 0.0}, 3.0, 1.5)};
    const Vec3 tx{2.0, 3.5, 1.2};

    const auto paths = enumerate_paths(scene, tx, 1);
    REQUIRE(paths.size() == 2);
    CHECK(paths[0].order() == 0);
    REQUIRE(paths[1].order() == 1);

    // Image-method identity, with the mirror computed independently here.
    const Vec3 mirrored{-tx.x, tx.y, tx.z};
    CHECK(paths[1].length_m ==
          doctest::Approx(distance(mirrored, scene.receiver_pos)).epsilon(1e-12));

    // The bounce point lies on the wall plane, between the endpoints.
    const Vec3 bounce = paths[1].points[0];
    CHECK(std::abs(bounce.x) < 1e-12);
    CHECK(bounce.y > 0.0);
    CHECK(bounce.y < 6.0);

    // Gain magnitude carries the reflection coefficient once.
    const double expected =
        0.8 * scene.rf.wavelength_m / (4.0 * std::numbers::pi * paths[1].length_m);
    CHECK(std::abs(paths[1].gain) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("wall between tx and rx blocks line of sight") {
    Scene scene = empty_scene();
    // Wall facing the transmitter side (+x), standing between tx and rx.
    scene.reflectors = {wall({2.0, 2.6, 1.0}, {1, 0, 0}, {0.5, 0.0}, 2.0, 1.0)};
    const Vec3 tx{4.0, 2.6, 1.0};
    CHECK(scene.receiver_pos.x < 2.0);

    const auto none = enumerate_paths(scene, tx, 0);
    CHECK(none.empty());

    // A small wall lets the segment pass around it.
    scene.reflectors = {wall({2.0, 2.6, 2.9}, {1, 0, 0}, {0.5, 0.0}, 0.05, 0.05)};
    const auto los = enumerate_paths(scene, tx, 0);
    CHECK(los.size() == 1);
}

TEST_CASE("grazing the rectangle edge within the tolerance does not occlude") {
    Scene scene = empty_scene();
    scene.receiver_pos = {1.0, 3.0, 1.0};
    scene.array.origin = scene.receiver_pos;
    // Rectangle whose +u (y) extent ends exactly at the segment's y.
    scene.reflectors = {wall({2.0, 2.0, 1.0}, {1, 0, 0}, {0.5, 0.0}, 1.0 + 1e-12, 1.0)};
    const Vec3 tx{3.0, 3.0, 1.0};
    const auto paths = enumerate_paths(scene, tx, 0);
    CHECK(paths.size() == 1); // edge graze, unoccluded
}

TEST_CASE("box scene path lengths are reciprocal under tx/rx swap") {
    SplitMix64 rng(5150);
    for (int trial = 0; trial < 10; ++trial) {
        const Vec3 a{rng.uniform(0.3, 2.7), rng.uniform(0.3, 2.7), rng.uniform(0.3, 2.2)};
        const Vec3 b{rng.uniform(0.3, 2.7), rng.uniform(0.3, 2.7), rng.uniform(0.3, 2.2)};
        Scene forward = box_scene({0.6, 0.0});
        forward.receiver_pos = b;
        forward.array.origin = b;
        Scene backward = box_scene({0.6, 0.0});
        backward.receiver_pos = a;
        backward.array.origin = a;

        const auto out = sorted_lengths(enumerate_paths(forward, a, 2));
        const auto back = sorted_lengths(enumerate_paths(backward, b, 2));
        REQUIRE(out.size() == back.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            CHECK(out[i] == doctest::Approx(back[i]).epsilon(1e-9));
    }
}

TEST_CASE("raising max_order only appends paths") {
    const Scene scene = box_scene({0.6, 0.0});
    const Vec3 tx{2.2, 0.8, 1.7};
    const auto low = enumerate_paths(scene, tx, 1);
    const auto high = enumerate_paths(scene, tx, 2);
    CHECK(high.size() > low.size());
    for (const PropagationPath &p : low) {
        const auto match = std::find_if(high.begin(), high.end(), [&](const PropagationPath &q) {
            return q.order() == p.order() && q.reflector_ids == p.reflector_ids &&
                   q.length_m == p.length_m && q.gain == p.gain;
        });
        CHECK(match != high.end());
    }

    // Order-1 count in a closed box: one bounce per wall.
    std::size_t order1 = 0;
    for (const PropagationPath &p : low)
        order1 += p.order() == 1;
    CHECK(order1 == 6);
}

TEST_CASE("gain magnitude never exceeds the free-space bound") {
    const Scene scene = box_scene({0.6, 0.0});
    const Vec3 tx{0.7, 2.1, 0.4};
    for (const PropagationPath &p : enumerate_paths(scene, tx, 2)) {
        const double bound = scene.rf.wavelength_m / (4.0 * std::numbers::pi * p.length_m);
        CHECK(std::abs(p.gain) <= bound * (1.0 + 1e-9));
        // Path length equals the sum of its segments by construction; check
        // against the straight-line lower bound.
        CHECK(p.length_m >= distance(tx, scene.receiver_pos) - 1e-12);
    }
}

TEST_CASE("reflection point distance matches displaced transmitters") {
    const Scene scene = box_scene({0.6, 0.0});
    const Vec3 tx1{2.0, 1.0, 1.3};
    const Vec3 tx2{2.0, 1.05, 1.3}; // displaced 0.05 m parallel to the x-walls

    const auto paths1 = enumerate_paths(scene, tx1, 1);
    const auto paths2 = enumerate_paths(scene, tx2, 1);
    for (const PropagationPath &a : paths1) {
        if (a.order() != 1)
            continue;
        for (const PropagationPath &b : paths2) {
            if (b.order() == 1 && b.reflector_ids == a.reflector_ids) {
                CHECK(reflection_point_distance(a, a) == 0.0);
                CHECK(reflection_point_distance(a, b) <= 0.05 + 1e-12);
            }
        }
    }

    // Mismatched orders or walls are a domain error.
    const PropagationPath &los = paths1.front();
    const PropagationPath &bounce = paths1.back();
    CHECK_THROWS_AS(reflection_point_distance(los, bounce), DomainError);
    PropagationPath other = bounce;
    other.reflector_ids[0] = (other.reflector_ids[0] + 1) % 6;
    CHECK_THROWS_AS(reflection_point_distance(bounce, other), DomainError);
}

TEST_CASE("simulated spectrum peaks at the line-of-sight direction") {
    const Scene scene = empty_scene();
    // Place the transmitter on the (45 deg, 30 deg) grid ray from the receiver.
    const double beta = deg_to_rad(30.0), alpha = deg_to_rad(45.0);
    const double range = 2.0;
    const Vec3 tx = scene.receiver_pos +
                    Vec3{std::cos(beta) * std::cos(alpha), std::cos(beta) * std::sin(alpha),
                         std::sin(beta)} *
                        range;
    const Grid spectrum = simulate_spectrum(scene, tx, 0);
    const Direction peak = channel::spectrum_argmax(spectrum);
    CHECK(peak.azimuth_deg == 45.0);
    CHECK(peak.elevation_deg == 30.0);
}

TEST_CASE("absorbing walls with blocked line of sight give a silent spectrum") {
    Scene scene = box_scene({0.0, 0.0});
    // Occluder in front of the receiver, reflective side toward the tx.
    scene.reflectors.push_back(wall({2.0, 1.2, 1.0}, {1, 0, 0}, {0.0, 0.0}, 0.6, 0.6));
    const Vec3 tx{2.6, 1.2, 1.0};
    const Grid spectrum = simulate_spectrum(scene, tx, 2);
    for (double v : spectrum.values())
        CHECK(v == 0.0);
}

TEST_CASE("nearby transmitters produce nearly identical spectra") {
    const Scene scene = empty_scene();
    const Vec3 tx1{2.0, 2.0, 1.5};
    const Vec3 tx2{2.01, 2.0, 1.5};
    const Grid s1 = simulate_spectrum(scene, tx1, 0);
    const Grid s2 = simulate_spectrum(scene, tx2, 0);
    const metrics::MetricReport report = metrics::compare(s1, s2);
    CHECK(report.psnr_db > 30.0);
}

TEST_CASE("receiver noise is seeded and deterministic") {
    const RFParams rf = rf_wifi();
    const channel::ArrayGeometry geom = channel::ArrayGeometry::half_wavelength(4, 4, rf);
    const channel::ReceivedMatrix clean =
        channel::received_matrix({{1.0, 0.0, Direction(10.0, 20.0)}}, geom, rf);

    channel::ReceivedMatrix a = clean, b = clean, c = clean;
    add_receiver_noise(a, 20.0, 7);
    add_receiver_noise(b, 20.0, 7);
    add_receiver_noise(c, 20.0, 8);
    CHECK(a.samples == b.samples);
    CHECK(a.samples != c.samples);
    CHECK(a.samples != clean.samples);

    // At 20 dB SNR the beamformer peak survives.
    const Grid noisy = channel::spatial_spectrum(a, geom, rf);
    const Direction peak = channel::spectrum_argmax(noisy);
    CHECK(peak.azimuth_deg == 10.0);
    CHECK(peak.elevation_deg == 20.0);
}

TEST_CASE("scene validation catches bad reflectors") {
    Scene scene = empty_scene();
    scene.reflectors = {wall({3, 3, 1}, {0, 0, 2.0}, {0.5, 0.0}, 1, 1)};
    CHECK_THROWS_AS(scene.validate(), std::invalid_argument);

    scene.reflectors = {wall({3, 3, 1}, {0, 0, 1}, {1.5, 0.0}, 1, 1)};
    CHECK_THROWS_AS(scene.validate(), std::invalid_argument);

    // Reflector entirely outside the box.
    scene.reflectors = {wall({30, 30, 30}, {0, 0, 1}, {0.5, 0.0}, 1, 1)};
    CHECK_THROWS_AS(scene.validate(), std::invalid_argument);

    scene.reflectors.clear();
    scene.receiver_pos = {7, 7, 7};
    CHECK_THROWS_AS(scene.validate(), std::invalid_argument);
}
