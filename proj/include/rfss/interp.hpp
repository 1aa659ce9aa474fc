// SPDX-License-Identifier: Apache-2.0
//
// Spectrum interpolation from neighboring transmitters: nearest-neighbor
// search, barycentric weights, weighted interpolation, and empirical
// verification of the quadratic error bound eps <= K * delta^2.

#ifndef RFSS_INTERP_HPP
#define RFSS_INTERP_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "rfss/geometry.hpp"
#include "rfss/grid.hpp"

namespace rfss::interp {

// L neighbor (position, spectrum) pairs around a target position.
struct NeighborSet {
    Vec3 target{};
    std::vector<Vec3> positions;
    std::vector<Grid> spectra;

    std::size_t count() const { return positions.size(); }
    // Neighborhood radius: max_i ||target - P_i||.
    double radius() const;
    void validate() const;
};

enum class WeightMethod { exact_simplex, shepard_fallback };

struct BarycentricWeights {
    std::vector<double> weights;
    WeightMethod method = WeightMethod::shepard_fallback;

    double sum() const;
};

// Indices of the `count` nearest positions to `target`, ties broken by the
// smaller index. With `exclude_target`, positions exactly equal to the target
// are skipped.
std::vector<std::size_t> knn(const std::vector<Vec3> &positions, const Vec3 &target,
                             std::size_t count, bool exclude_target = false);

// Exact affine-system solve when the four neighbors form a non-degenerate
// tetrahedron containing the target; otherwise normalized inverse-squared
// distance (Shepard) weights. A neighbor coincident with the target receives
// weight one.
BarycentricWeights barycentric_weights(const std::vector<Vec3> &positions, const Vec3 &target);

// Per-cell weighted sum; negative cells are clamped to zero.
Grid interpolate_spectrum(const NeighborSet &neighbors, const BarycentricWeights &weights);

// Uniform 1/L weights.
Grid knn_average(const NeighborSet &neighbors);

// Deterministic position -> spectrum mapping under verification.
class FieldOracle {
  public:
    virtual ~FieldOracle() = default;
    virtual Grid evaluate(const Vec3 &position) const = 0;
    virtual bool has_analytic_hessian() const { return false; }
    // Curvature constant K for fields that know it in closed form.
    virtual double analytic_curvature() const { return 0.0; }
};

// K = 1/2 * max over grid points of the worst per-cell Hessian spectral norm,
// estimated with central differences of step `h` on points spaced `h` apart
// inside [lo, hi] (a degenerate box probes a single point).
double estimate_curvature(const FieldOracle &oracle, const Vec3 &lo, const Vec3 &hi, double h);

struct ErrorBoundReport {
    double error = 0.0;     // per-cell RMS interpolation error
    double curvature = 0.0; // local K estimate
    double radius = 0.0;    // delta
    WeightMethod method = WeightMethod::shepard_fallback;
    // Asserted only for exact-simplex weights; nullopt = indeterminate.
    std::optional<bool> satisfied;

    double bound() const { return curvature * radius * radius; }
};

// Interpolates oracle spectra from the nearest `count` positions and checks
// the error against the locally estimated quadratic bound.
ErrorBoundReport error_bound_check(const FieldOracle &oracle, const Vec3 &target,
                                   std::size_t count, const std::vector<Vec3> &positions,
                                   double hessian_step);

} // namespace rfss::interp

#endif
