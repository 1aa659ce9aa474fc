// SPDX-License-Identifier: Apache-2.0

#include "rfss/interp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace rfss::interp {

double NeighborSet::radius() const {
    double r = 0.0;
    for (const Vec3 &p : positions)
        r = std::max(r, distance(target, p));
    return r;
}

void NeighborSet::validate() const {
    if (positions.empty())
        throw std::invalid_argument("NeighborSet: need at least one neighbor");
    if (positions.size() != spectra.size())
        throw std::invalid_argument("NeighborSet: positions and spectra differ in length");
    for (std::size_t i = 0; i + 1 < positions.size(); ++i)
        for (std::size_t j = i + 1; j < positions.size(); ++j)
            if (positions[i] == positions[j])
                throw std::invalid_argument("NeighborSet: neighbor positions must be distinct");
    for (std::size_t i = 1; i < spectra.size(); ++i)
        if (!spectra[i].same_shape(spectra[0]))
            throw std::invalid_argument("NeighborSet: spectra must share one shape");
}

double BarycentricWeights::sum() const {
    return std::accumulate(weights.begin(), weights.end(), 0.0);
}

std::vector<std::size_t> knn(const std::vector<Vec3> &positions, const Vec3 &target,
                             std::size_t count, bool exclude_target) {
    std::vector<std::size_t> candidates;
    candidates.reserve(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (exclude_target && positions[i] == target)
            continue;
        candidates.push_back(i);
    }
    if (count > candidates.size())
        throw std::invalid_argument("knn: fewer candidates than requested neighbors");

    std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
        const double da = (positions[a] - target).squared_norm();
        const double db = (positions[b] - target).squared_norm();
        if (da != db)
            return da < db;
        return a < b;
    });
    candidates.resize(count);
    return candidates;
}

namespace {

BarycentricWeights shepard_weights(const std::vector<Vec3> &positions, const Vec3 &target) {
    BarycentricWeights result;
    result.method = WeightMethod::shepard_fallback;
    result.weights.resize(positions.size());
    double total = 0.0;
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const double d2 = (positions[i] - target).squared_norm();
        result.weights[i] = 1.0 / d2;
        total += result.weights[i];
    }
    for (double &w : result.weights)
        w /= total;
    return result;
}

} // namespace

BarycentricWeights barycentric_weights(const std::vector<Vec3> &positions, const Vec3 &target) {
    if (positions.empty())
        throw std::invalid_argument("barycentric_weights: need at least one neighbor");

    // Coincident neighbor: the interpolant is the neighbor itself.
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (positions[i] == target) {
            BarycentricWeights result;
            result.method = WeightMethod::exact_simplex;
            result.weights.assign(positions.size(), 0.0);
            result.weights[i] = 1.0;
            return result;
        }
    }

    if (positions.size() == 4) {
        // Affine system in offsets scaled by the neighborhood radius, so the
        // degeneracy threshold is scale-free.
        double scale = 0.0;
        for (const Vec3 &p : positions)
            scale = std::max(scale, distance(p, target));

        Eigen::Matrix4d m;
        for (int i = 0; i < 4; ++i) {
            const Vec3 off = (positions[static_cast<std::size_t>(i)] - target) / scale;
            m(0, i) = 1.0;
            m(1, i) = off.x;
            m(2, i) = off.y;
            m(3, i) = off.z;
        }
        if (std::abs(m.determinant()) >= 1e-12) {
            const Eigen::Vector4d rhs(1.0, 0.0, 0.0, 0.0);
            const Eigen::Vector4d w = m.partialPivLu().solve(rhs);
            if (w.minCoeff() >= -1e-9) {
                BarycentricWeights result;
                result.method = WeightMethod::exact_simplex;
                result.weights = {w(0), w(1), w(2), w(3)};
                return result;
            }
        }
    }
    return shepard_weights(positions, target);
}

Grid interpolate_spectrum(const NeighborSet &neighbors, const BarycentricWeights &weights) {
    neighbors.validate();
    if (weights.weights.size() != neighbors.count())
        throw std::invalid_argument("interpolate_spectrum: weight count mismatch");

    const Grid &first = neighbors.spectra.front();
    Grid out(first.rows(), first.cols());
    for (std::size_t cell = 0; cell < out.size(); ++cell) {
        double acc = 0.0;
        for (std::size_t i = 0; i < neighbors.count(); ++i)
            acc += weights.weights[i] * neighbors.spectra[i][cell];
        out[cell] = std::max(acc, 0.0);
    }
    return out;
}

Grid knn_average(const NeighborSet &neighbors) {
    neighbors.validate();
    BarycentricWeights uniform;
    uniform.method = WeightMethod::shepard_fallback;
    uniform.weights.assign(neighbors.count(), 1.0 / static_cast<double>(neighbors.count()));
    return interpolate_spectrum(neighbors, uniform);
}

namespace {

// 19-point stencil for the per-cell 3x3 Hessian at p: center, +-h along each
// axis, and the four diagonal combinations of each axis pair.
double hessian_norm_at(const FieldOracle &oracle, const Vec3 &p, double h) {
    const Vec3 axes[3] = {{h, 0.0, 0.0}, {0.0, h, 0.0}, {0.0, 0.0, h}};

    const Grid center = oracle.evaluate(p);
    Grid plus[3], minus[3];
    for (int i = 0; i < 3; ++i) {
        plus[i] = oracle.evaluate(p + axes[i]);
        minus[i] = oracle.evaluate(p - axes[i]);
    }
    Grid cross_pp[3], cross_pm[3], cross_mp[3], cross_mm[3];
    const int pair_a[3] = {0, 0, 1};
    const int pair_b[3] = {1, 2, 2};
    for (int k = 0; k < 3; ++k) {
        const Vec3 &ea = axes[pair_a[k]];
        const Vec3 &eb = axes[pair_b[k]];
        cross_pp[k] = oracle.evaluate(p + ea + eb);
        cross_pm[k] = oracle.evaluate(p + ea - eb);
        cross_mp[k] = oracle.evaluate(p - ea + eb);
        cross_mm[k] = oracle.evaluate(p - ea - eb);
    }

    const double h2 = h * h;
    double worst = 0.0;
    for (std::size_t cell = 0; cell < center.size(); ++cell) {
        Eigen::Matrix3d hess;
        for (int i = 0; i < 3; ++i)
            hess(i, i) = (plus[i][cell] - 2.0 * center[cell] + minus[i][cell]) / h2;
        for (int k = 0; k < 3; ++k) {
            const double v = (cross_pp[k][cell] - cross_pm[k][cell] - cross_mp[k][cell] +
                              cross_mm[k][cell]) /
                             (4.0 * h2);
            hess(pair_a[k], pair_b[k]) = v;
            hess(pair_b[k], pair_a[k]) = v;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig;
        eig.computeDirect(hess, Eigen::EigenvaluesOnly);
        const double norm =
            std::max(std::abs(eig.eigenvalues()(0)), std::abs(eig.eigenvalues()(2)));
        worst = std::max(worst, norm);
    }
    return worst;
}

} // namespace

double estimate_curvature(const FieldOracle &oracle, const Vec3 &lo, const Vec3 &hi, double h) {
    if (!(h > 0.0))
        throw std::invalid_argument("estimate_curvature: step must be positive");
    const auto steps_along = [&](double a, double b) {
        return static_cast<std::size_t>(std::floor(std::max(0.0, b - a) / h + 1e-12));
    };
    const std::size_t nx = steps_along(lo.x, hi.x);
    const std::size_t ny = steps_along(lo.y, hi.y);
    const std::size_t nz = steps_along(lo.z, hi.z);

    double worst = 0.0;
    for (std::size_t ix = 0; ix <= nx; ++ix)
        for (std::size_t iy = 0; iy <= ny; ++iy)
            for (std::size_t iz = 0; iz <= nz; ++iz) {
                const Vec3 p = lo + Vec3{static_cast<double>(ix) * h, static_cast<double>(iy) * h,
                                         static_cast<double>(iz) * h};
                worst = std::max(worst, hessian_norm_at(oracle, p, h));
            }
    return 0.5 * worst;
}

ErrorBoundReport error_bound_check(const FieldOracle &oracle, const Vec3 &target,
                                   std::size_t count, const std::vector<Vec3> &positions,
                                   double hessian_step) {
    const std::vector<std::size_t> picked = knn(positions, target, count);

    NeighborSet neighbors;
    neighbors.target = target;
    for (std::size_t idx : picked) {
        neighbors.positions.push_back(positions[idx]);
        neighbors.spectra.push_back(oracle.evaluate(positions[idx]));
    }
    const BarycentricWeights weights = barycentric_weights(neighbors.positions, target);
    const Grid predicted = interpolate_spectrum(neighbors, weights);
    const Grid truth = oracle.evaluate(target);

    double sq = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double d = truth[i] - predicted[i];
        sq += d * d;
    }

    ErrorBoundReport report;
    report.error = std::sqrt(sq / static_cast<double>(truth.size()));
    report.radius = neighbors.radius();
    report.method = weights.method;
    report.curvature = estimate_curvature(oracle, target, target, hessian_step);
    if (weights.method == WeightMethod::exact_simplex)
        report.satisfied = report.error <= report.bound() + 1e-9;
    return report;
}

} // namespace rfss::interp
