// SPDX-License-Identifier: Apache-2.0
//
// Per-neighbor per-pixel weight matrices trained by gradient descent on an
// l2 objective: each spectrum cell of each neighbor carries its own weight,
// and the prediction is the per-cell weighted sum.

#ifndef RFSS_KNNDL_HPP
#define RFSS_KNNDL_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rfss/grid.hpp"
#include "rfss/interp.hpp"

namespace rfss::knndl {

struct WeightMatrices {
    std::vector<Grid> per_neighbor; // L grids, one weight per spectrum cell

    std::size_t count() const { return per_neighbor.size(); }
    void validate() const;
};

struct TrainConfig {
    std::size_t iterations = 200;
    double learning_rate = 0.05;
    std::uint64_t seed = 0;
};

// Every entry 1/L, so the initial prediction equals the plain KNN average.
WeightMatrices init_weights(std::size_t neighbor_count, std::size_t rows, std::size_t cols);

// Per-cell sum_i W_i(p,q) * SS_i(p,q); weights may be negative, no clamping.
Grid predict(const WeightMatrices &weights, const interp::NeighborSet &neighbors);

struct LossGrad {
    double loss = 0.0;
    WeightMatrices grad;
};

// loss = sum_cells (pred - target)^2, grad_i = 2 (pred - target) .* SS_i.
LossGrad loss_and_grad(const WeightMatrices &weights, const interp::NeighborSet &neighbors,
                       const Grid &target);

struct TrainResult {
    WeightMatrices weights;
    // loss_trace[0] is the initial loss; one entry per accepted step after it.
    std::vector<double> loss_trace;
};

// Fixed-step gradient descent from init_weights with backtracking halving
// (at most 30 halvings per step; the halved step persists). The trace is
// non-increasing. Spectra are scaled by max(target) internally; the returned
// weights apply unchanged to the raw spectra.
TrainResult train(const interp::NeighborSet &neighbors, const Grid &target,
                  const TrainConfig &config);

struct NeighborWeightStats {
    double mean = 0.0;
    double stddev = 0.0;
};

// Per-neighbor statistics over all entries after normalizing each trained set
// by its max absolute entry, so values land in [-1, 1].
std::vector<NeighborWeightStats> weight_stats(const std::vector<WeightMatrices> &trained);

} // namespace rfss::knndl

#endif
