// SPDX-License-Identifier: Apache-2.0
//
// Spectrum comparison metrics over [0,1]-normalized grids, plus the Gaussian
// negative log-likelihood whose argmin coincides with the l2 argmin.

#ifndef RFSS_METRICS_HPP
#define RFSS_METRICS_HPP

#include <cmath>
#include <cstddef>
#include <limits>

#include "rfss/grid.hpp"

namespace rfss::metrics {

// PSNR of identical grids. An explicit infinity, never a capped number.
inline constexpr double kPsnrSentinel = std::numeric_limits<double>::infinity();

inline bool is_psnr_sentinel(double psnr_db) { return std::isinf(psnr_db) && psnr_db > 0.0; }

struct NormalizedPair {
    Grid pred;
    Grid truth;
};

// Scale both grids by max(truth); the prediction is clamped to [0, 1].
// Throws DomainError when the truth grid has no positive maximum.
NormalizedPair normalize_pair(const Grid &pred, const Grid &truth);

double mse(const Grid &a, const Grid &b);

// 10*log10(1/mse) with peak 1; kPsnrSentinel when mse == 0.
double psnr(const Grid &a, const Grid &b);

struct SsimParams {
    std::size_t window = 8;
    double c1 = 0.01 * 0.01; // (k1 * data_range)^2, data range 1
    double c2 = 0.03 * 0.03;
};

// Mean local SSIM over all full windows, stride 1, uniform weighting.
double ssim(const Grid &a, const Grid &b, const SsimParams &params = {});

// (Q/2) log(2 pi sigma^2) + (1/(2 sigma^2)) sum (pred - truth)^2.
double gaussian_nll(const Grid &pred, const Grid &truth, double sigma_sq);

struct MetricReport {
    double mse = 0.0;
    double psnr_db = 0.0;
    double ssim = 0.0;
    // LPIPS needs a pretrained perceptual network; reported as unsupported.
    static constexpr const char *lpips = "unsupported";
};

// normalize_pair followed by all three metrics.
MetricReport compare(const Grid &pred, const Grid &truth);

} // namespace rfss::metrics

#endif
