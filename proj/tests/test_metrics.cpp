// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "rfss/errors.hpp"
#include "rfss/metrics.hpp"
#include "rfss/rng.hpp"

using namespace rfss;
using namespace rfss::metrics;

namespace {

Grid constant_grid(double value, std::size_t rows = 16, std::size_t cols = 12) {
    return Grid(rows, cols, value);
}

Grid random_grid(SplitMix64 &rng, std::size_t rows = 16, std::size_t cols = 12) {
    Grid g(rows, cols);
    for (double &v : g.values())
        v = rng.next_double();
    return g;
}

} // namespace

TEST_CASE("normalize_pair divides by the truth maximum and clamps") {
    Grid truth = constant_grid(0.0, 4, 4);
    truth(1, 1) = 4.0;
    truth(0, 0) = 2.0;
    Grid pred = constant_grid(0.0, 4, 4);
    pred(0, 0) = 5.0;
    pred(2, 2) = -1.0;

    const NormalizedPair pair = normalize_pair(pred, truth);
    CHECK(pair.truth(0, 0) == 0.5);
    CHECK(pair.truth(1, 1) == 1.0);
    CHECK(pair.pred(0, 0) == 1.0);  // clamped from 1.25
    CHECK(pair.pred(2, 2) == 0.0);  // clamped from negative

    const NormalizedPair same = normalize_pair(truth, truth);
    CHECK(same.pred == same.truth);

    CHECK_THROWS_AS(normalize_pair(pred, constant_grid(0.0, 4, 4)), DomainError);
}

TEST_CASE("mse closed-form cases") {
    CHECK(mse(constant_grid(0.3), constant_grid(0.3)) == 0.0);
    CHECK(mse(constant_grid(0.0), constant_grid(1.0)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(mse(constant_grid(0.0), constant_grid(0.1)) ==
          doctest::Approx(0.01).epsilon(1e-12));
    CHECK_THROWS_AS(mse(constant_grid(0.0, 2, 2), constant_grid(0.0, 3, 3)),
                    std::invalid_argument);
}

TEST_CASE("psnr and the sentinel") {
    CHECK(psnr(constant_grid(0.0), constant_grid(0.1)) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(psnr(constant_grid(0.0), constant_grid(1.0)) == doctest::Approx(0.0).scale(1.0));
    CHECK(is_psnr_sentinel(psnr(constant_grid(0.42), constant_grid(0.42))));
    CHECK_FALSE(is_psnr_sentinel(20.0));
}

TEST_CASE("ssim closed-form cases") {
    CHECK(ssim(constant_grid(0.37), constant_grid(0.37)) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ssim(constant_grid(0.5), constant_grid(0.5)) == doctest::Approx(1.0).epsilon(1e-12));

    // Constant 0 vs constant 1: (C1*C2) / ((1+C1)*C2) = C1/(1+C1).
    const double expected = 0.0001 / 1.0001;
    CHECK(ssim(constant_grid(0.0), constant_grid(1.0)) ==
          doctest::Approx(expected).epsilon(1e-9));

    SplitMix64 rng(5);
    const Grid a = random_grid(rng);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(ssim(constant_grid(0.0, 7, 7), constant_grid(0.0, 7, 7)),
                    std::invalid_argument);
}

TEST_CASE("metric symmetry and bounds on seeded inputs") {
    SplitMix64 rng(77);
    for (int trial = 0; trial < 25; ++trial) {
        const Grid a = random_grid(rng);
        const Grid b = random_grid(rng);
        CHECK(mse(a, b) == mse(b, a));
        CHECK(std::abs(ssim(a, b) - ssim(b, a)) < 1e-12);
        const double s = ssim(a, b);
        CHECK(s >= -1.0);
        CHECK(s <= 1.0);
    }
}

TEST_CASE("psnr decreases strictly as mse grows") {
    std::vector<double> errors = {1e-6, 1e-4, 0.01, 0.2, 0.9};
    double previous = std::numeric_limits<double>::infinity();
    for (double e : errors) {
        const double value = 10.0 * std::log10(1.0 / e);
        CHECK(value < previous);
        previous = value;
    }
    // Through the public surface: larger constant offset, smaller psnr.
    CHECK(psnr(constant_grid(0.0), constant_grid(0.2)) >
          psnr(constant_grid(0.0), constant_grid(0.4)));
}

TEST_CASE("gaussian nll closed-form cases") {
    const Grid truth = constant_grid(0.4, 6, 5);
    const double q = 30.0;
    const double sigma_sq = 2.0;
    CHECK(gaussian_nll(truth, truth, sigma_sq) ==
          doctest::Approx(0.5 * q * std::log(2.0 * std::numbers::pi * sigma_sq))
              .epsilon(1e-12));

    const Grid single_truth = constant_grid(0.0, 1, 1);
    CHECK(gaussian_nll(single_truth, single_truth, 1.0 / (2.0 * std::numbers::pi)) ==
          doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(gaussian_nll(truth, truth, 0.0), DomainError);
}

TEST_CASE("nll differences equal scaled l2 differences") {
    SplitMix64 rng(31);
    const Grid truth = random_grid(rng);
    for (double sigma_sq : {0.01, 1.0, 100.0}) {
        const Grid a = random_grid(rng);
        const Grid b = random_grid(rng);
        const double nll_diff = gaussian_nll(a, truth, sigma_sq) -
                                gaussian_nll(b, truth, sigma_sq);
        double sse_a = 0.0, sse_b = 0.0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            sse_a += (a[i] - truth[i]) * (a[i] - truth[i]);
            sse_b += (b[i] - truth[i]) * (b[i] - truth[i]);
        }
        const double expected = (sse_a - sse_b) / (2.0 * sigma_sq);
        CHECK(std::abs(nll_diff - expected) <=
              1e-12 * std::max({1.0, std::abs(nll_diff), std::abs(expected)}));
    }
}

TEST_CASE("nll argmin equals l2 argmin over candidate sets") {
    SplitMix64 rng(8080);
    for (int trial = 0; trial < 30; ++trial) {
        const Grid truth = random_grid(rng);
        std::vector<Grid> candidates;
        for (int c = 0; c < 6; ++c)
            candidates.push_back(random_grid(rng));

        std::size_t l2_best = 0;
        double l2_min = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            double sse = 0.0;
            for (std::size_t i = 0; i < truth.size(); ++i)
                sse += (candidates[c][i] - truth[i]) * (candidates[c][i] - truth[i]);
            if (sse < l2_min) {
                l2_min = sse;
                l2_best = c;
            }
        }
        for (double sigma_sq : {0.01, 1.0, 100.0}) {
            std::size_t nll_best = 0;
            double nll_min = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < candidates.size(); ++c) {
                const double nll = gaussian_nll(candidates[c], truth, sigma_sq);
                if (nll < nll_min) {
                    nll_min = nll;
                    nll_best = c;
                }
            }
            CHECK(nll_best == l2_best);
        }
    }
}

TEST_CASE("compare produces a consistent report") {
    SplitMix64 rng(3);
    const Grid truth = random_grid(rng, 20, 16);
    const MetricReport identical = compare(truth, truth);
    CHECK(identical.mse == 0.0);
    CHECK(is_psnr_sentinel(identical.psnr_db));
    CHECK(identical.ssim == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::string(MetricReport::lpips) == "unsupported");
}
