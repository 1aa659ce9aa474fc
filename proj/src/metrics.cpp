// SPDX-License-Identifier: Apache-2.0

#include "rfss/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "rfss/errors.hpp"

namespace rfss::metrics {

NormalizedPair normalize_pair(const Grid &pred, const Grid &truth) {
    require_same_shape(pred, truth, "normalize_pair");
    const double peak = truth.max_value();
    if (!(peak > 0.0))
        throw DomainError("normalize_pair: truth grid has no positive maximum");
    NormalizedPair out{Grid(pred.rows(), pred.cols()), Grid(truth.rows(), truth.cols())};
    for (std::size_t i = 0; i < pred.size(); ++i) {
        out.pred[i] = std::clamp(pred[i] / peak, 0.0, 1.0);
        out.truth[i] = truth[i] / peak;
    }
    return out;
}

double mse(const Grid &a, const Grid &b) {
    require_same_shape(a, b, "mse");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum / static_cast<double>(a.size());
}

double psnr(const Grid &a, const Grid &b) {
    const double err = mse(a, b);
    if (err == 0.0)
        return kPsnrSentinel;
    return 10.0 * std::log10(1.0 / err);
}

namespace {

// Inclusive prefix-sum table with a zero border; window sums in O(1).
class SumTable {
  public:
    SumTable(const Grid &g, const Grid *other = nullptr) : rows_(g.rows()), cols_(g.cols()) {
        table_.assign((rows_ + 1) * (cols_ + 1), 0.0);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) {
                const double v = other ? g(r, c) * (*other)(r, c) : g(r, c);
                at(r + 1, c + 1) = v + at(r, c + 1) + at(r + 1, c) - at(r, c);
            }
    }

    double window(std::size_t r, std::size_t c, std::size_t size) const {
        return at(r + size, c + size) - at(r, c + size) - at(r + size, c) + at(r, c);
    }

  private:
    double &at(std::size_t r, std::size_t c) { return table_[r * (cols_ + 1) + c]; }
    double at(std::size_t r, std::size_t c) const { return table_[r * (cols_ + 1) + c]; }

    std::size_t rows_, cols_;
    std::vector<double> table_;
};

// Squared-product tables: pass the grid itself twice.
SumTable squared_table(const Grid &g) { return SumTable(g, &g); }

} // namespace

double ssim(const Grid &a, const Grid &b, const SsimParams &params) {
    require_same_shape(a, b, "ssim");
    const std::size_t w = params.window;
    if (a.rows() < w || a.cols() < w)
        throw std::invalid_argument("ssim: grid smaller than the window");

    const SumTable sa(a), sb(b);
    const SumTable saa = squared_table(a), sbb = squared_table(b);
    const SumTable sab(a, &b);

    const double n = static_cast<double>(w * w);
    double total = 0.0;
    std::size_t windows = 0;
    for (std::size_t r = 0; r + w <= a.rows(); ++r) {
        for (std::size_t c = 0; c + w <= a.cols(); ++c) {
            const double mu_a = sa.window(r, c, w) / n;
            const double mu_b = sb.window(r, c, w) / n;
            const double var_a = saa.window(r, c, w) / n - mu_a * mu_a;
            const double var_b = sbb.window(r, c, w) / n - mu_b * mu_b;
            const double cov = sab.window(r, c, w) / n - mu_a * mu_b;
            const double num = (2.0 * mu_a * mu_b + params.c1) * (2.0 * cov + params.c2);
            const double den =
                (mu_a * mu_a + mu_b * mu_b + params.c1) * (var_a + var_b + params.c2);
            total += num / den;
            ++windows;
        }
    }
    return total / static_cast<double>(windows);
}

double gaussian_nll(const Grid &pred, const Grid &truth, double sigma_sq) {
    require_same_shape(pred, truth, "gaussian_nll");
    if (!(sigma_sq > 0.0))
        throw DomainError("gaussian_nll: variance must be positive");
    double sse = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        sse += d * d;
    }
    const double q = static_cast<double>(pred.size());
    return 0.5 * q * std::log(2.0 * std::numbers::pi * sigma_sq) + sse / (2.0 * sigma_sq);
}

MetricReport compare(const Grid &pred, const Grid &truth) {
    const NormalizedPair pair = normalize_pair(pred, truth);
    MetricReport report;
    report.mse = mse(pair.pred, pair.truth);
    report.psnr_db = report.mse == 0.0 ? kPsnrSentinel : 10.0 * std::log10(1.0 / report.mse);
    report.ssim = ssim(pair.pred, pair.truth);
    return report;
}

} // namespace rfss::metrics
