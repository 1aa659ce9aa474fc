// SPDX-License-Identifier: Apache-2.0

#include "rfss/knndl.hpp"

#include <cmath>
#include <stdexcept>

namespace rfss::knndl {

void WeightMatrices::validate() const {
    if (per_neighbor.empty())
        throw std::invalid_argument("WeightMatrices: need at least one matrix");
    for (std::size_t i = 1; i < per_neighbor.size(); ++i)
        if (!per_neighbor[i].same_shape(per_neighbor[0]))
            throw std::invalid_argument("WeightMatrices: matrices must share one shape");
    for (const Grid &g : per_neighbor)
        for (double v : g.values())
            if (!std::isfinite(v))
                throw std::invalid_argument("WeightMatrices: entries must be finite");
}

WeightMatrices init_weights(std::size_t neighbor_count, std::size_t rows, std::size_t cols) {
    if (neighbor_count == 0 || rows == 0 || cols == 0)
        throw std::invalid_argument("init_weights: dimensions must be positive");
    WeightMatrices w;
    w.per_neighbor.assign(neighbor_count,
                          Grid(rows, cols, 1.0 / static_cast<double>(neighbor_count)));
    return w;
}

Grid predict(const WeightMatrices &weights, const interp::NeighborSet &neighbors) {
    neighbors.validate();
    if (weights.count() != neighbors.count())
        throw std::invalid_argument("predict: weight count does not match neighbor count");
    const Grid &first = neighbors.spectra.front();
    if (!weights.per_neighbor.front().same_shape(first))
        throw std::invalid_argument("predict: weight shape does not match spectra");

    Grid out(first.rows(), first.cols());
    for (std::size_t cell = 0; cell < out.size(); ++cell) {
        double acc = 0.0;
        for (std::size_t i = 0; i < neighbors.count(); ++i)
            acc += weights.per_neighbor[i][cell] * neighbors.spectra[i][cell];
        out[cell] = acc;
    }
    return out;
}

LossGrad loss_and_grad(const WeightMatrices &weights, const interp::NeighborSet &neighbors,
                       const Grid &target) {
    const Grid pred = predict(weights, neighbors);
    require_same_shape(pred, target, "loss_and_grad");

    LossGrad out;
    out.grad.per_neighbor.assign(weights.count(), Grid(target.rows(), target.cols()));
    for (std::size_t cell = 0; cell < target.size(); ++cell) {
        const double resid = pred[cell] - target[cell];
        out.loss += resid * resid;
        for (std::size_t i = 0; i < weights.count(); ++i)
            out.grad.per_neighbor[i][cell] = 2.0 * resid * neighbors.spectra[i][cell];
    }
    return out;
}

TrainResult train(const interp::NeighborSet &neighbors, const Grid &target,
                  const TrainConfig &config) {
    neighbors.validate();
    if (config.iterations == 0 || !(config.learning_rate > 0.0))
        throw std::invalid_argument("train: iterations and learning rate must be positive");

    // Shared scale keeps the fixed default step meaningful across scenes; the
    // learned weights are identical in scaled and raw space.
    const double peak = target.max_value();
    const double scale = peak > 0.0 ? peak : 1.0;
    interp::NeighborSet scaled = neighbors;
    for (Grid &g : scaled.spectra)
        for (double &v : g.values())
            v /= scale;
    Grid scaled_target = target;
    for (double &v : scaled_target.values())
        v /= scale;

    TrainResult result;
    result.weights = init_weights(neighbors.count(), target.rows(), target.cols());
    double loss = loss_and_grad(result.weights, scaled, scaled_target).loss;
    result.loss_trace.push_back(loss);

    double step = config.learning_rate;
    for (std::size_t iter = 0; iter < config.iterations; ++iter) {
        const LossGrad lg = loss_and_grad(result.weights, scaled, scaled_target);

        WeightMatrices candidate;
        double candidate_loss = 0.0;
        bool accepted = false;
        for (int halving = 0; halving <= 30; ++halving) {
            candidate = result.weights;
            for (std::size_t i = 0; i < candidate.count(); ++i)
                for (std::size_t cell = 0; cell < candidate.per_neighbor[i].size(); ++cell)
                    candidate.per_neighbor[i][cell] -= step * lg.grad.per_neighbor[i][cell];
            candidate_loss = loss_and_grad(candidate, scaled, scaled_target).loss;
            if (candidate_loss <= loss) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted)
            break; // no descent step available at the smallest scale
        result.weights = std::move(candidate);
        loss = candidate_loss;
        result.loss_trace.push_back(loss);
    }
    return result;
}

std::vector<NeighborWeightStats> weight_stats(const std::vector<WeightMatrices> &trained) {
    if (trained.empty())
        throw std::invalid_argument("weight_stats: empty collection");
    const std::size_t count = trained.front().count();
    for (const WeightMatrices &w : trained)
        if (w.count() != count)
            throw std::invalid_argument("weight_stats: neighbor counts differ");

    std::vector<double> sum(count, 0.0), sum_sq(count, 0.0);
    std::vector<std::size_t> n(count, 0);
    for (const WeightMatrices &w : trained) {
        double peak = 0.0;
        for (const Grid &g : w.per_neighbor)
            for (double v : g.values())
                peak = std::max(peak, std::abs(v));
        const double norm = peak > 0.0 ? peak : 1.0;
        for (std::size_t i = 0; i < count; ++i)
            for (double v : w.per_neighbor[i].values()) {
                const double scaled = v / norm;
                sum[i] += scaled;
                sum_sq[i] += scaled * scaled;
                ++n[i];
            }
    }

    std::vector<NeighborWeightStats> stats(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double mean = sum[i] / static_cast<double>(n[i]);
        const double var = std::max(0.0, sum_sq[i] / static_cast<double>(n[i]) - mean * mean);
        stats[i] = {mean, std::sqrt(var)};
    }
    return stats;
}

} // namespace rfss::knndl
