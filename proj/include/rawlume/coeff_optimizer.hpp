// Copyright (c) 2026 The rawlume Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Zero-reference fitting of the bilateral grid set on the low-resolution
// image. The objective is
//
//   exposure_loss(I_N) + w_tv * sum_n tv3(B_n) + w_mag * sum_n |B_n|^2 / 4096
//
// where I_N comes from N progressive steps driven by the sliced grids. The
// regularizers stand in for the perceptual and aesthetic terms used when the
// coefficients are learned by a network. Gradients are exact: reverse
// accumulation through every step, including the luminance feedback, then
// the slicing adjoint.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "rawlume/bilateral_grid.hpp"
#include "rawlume/enhancer.hpp"
#include "rawlume/error.hpp"
#include "rawlume/image.hpp"
#include "rawlume/profile.hpp"
#include "rawlume/raw_core.hpp"

namespace rawlume {

struct FitConfig {
    double delta = 0.2;
    int iterations = kDefaultIterations;
    double w_tv = 0.1;
    double w_mag = 0.01;
    int steps = 200;
    double step_size = 0.05;
    double momentum = 0.9;

    void validate() const {
        detail::require(delta > 0.0, "delta must be > 0");
        detail::require(iterations >= 1, "iterations must be >= 1");
        detail::require(w_tv >= 0.0 && w_mag >= 0.0, "regularizer weights must be >= 0");
        detail::require(steps >= 0, "steps must be >= 0");
        detail::require(step_size > 0.0, "step_size must be > 0");
        detail::require(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0,1)");
    }
};

// Mean over pixels of 1 - exp(-(p - 0.5)^2 / (2 delta^2)), p = channel mean.
template <std::size_t C>
double exposure_loss(const MultiPlane<C>& img, double delta) {
    detail::require(img.width() > 0 && img.height() > 0, "exposure_loss: empty image");
    detail::require(delta > 0.0, "exposure_loss: delta must be > 0");
    const std::size_t m = img[0].size();
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double p = 0.0;
        for (std::size_t c = 0; c < C; ++c) p += img[c].values()[i];
        p /= static_cast<double>(C);
        const double d = p - 0.5;
        total += 1.0 - std::exp(-d * d / (2.0 * delta * delta));
    }
    return total / static_cast<double>(m);
}

inline double exposure_loss(const RgbImage& img, double delta) { return exposure_loss(img.rgb, delta); }

inline constexpr int kGridAdjacentPairs = 3 * (BilateralGrid::kSize - 1) * BilateralGrid::kSize * BilateralGrid::kSize;

// Mean squared difference over all axis-adjacent cell pairs. When gradient is
// given, d(tv3)/dB is accumulated into it with the given scale.
inline double grid_tv3(const BilateralGrid& grid, BilateralGrid* gradient = nullptr, double scale = 1.0) {
    constexpr int n = BilateralGrid::kSize;
    constexpr std::array<std::array<int, 3>, 3> kAxes = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    double sum = 0.0;
    const double g = 2.0 * scale / kGridAdjacentPairs;
    for (const auto& ax : kAxes) {
        for (int k = 0; k + ax[2] < n; ++k)
            for (int j = 0; j + ax[1] < n; ++j)
                for (int i = 0; i + ax[0] < n; ++i) {
                    const double d = grid(i + ax[0], j + ax[1], k + ax[2]) - grid(i, j, k);
                    sum += d * d;
                    if (gradient) {
                        (*gradient)(i + ax[0], j + ax[1], k + ax[2]) += g * d;
                        (*gradient)(i, j, k) -= g * d;
                    }
                }
    }
    return sum / kGridAdjacentPairs;
}

struct Objective {
    double total = 0.0;
    double exposure = 0.0;
    double regularization = 0.0;
    GridSet gradient;
};

// Objective and exact gradient for a fixed slicing plan (fixed guidance).
inline Objective objective_and_gradient(const MultiPlane<3>& input, const GridSet& grids,
                                        const SlicingPlan& plan, const std::array<double, 3>& lum_w,
                                        const FitConfig& cfg) {
    detail::require(!grids.empty(), "objective: need at least one grid");
    detail::require(plan.width() == input.width() && plan.height() == input.height(),
                    "objective: guidance geometry mismatch");
    const std::size_t npix = input[0].size();
    const std::size_t steps = grids.size();

    // Forward, keeping what the reverse pass needs.
    std::vector<MultiPlane<3>> images;
    std::vector<Plane> thetas, lums;
    std::vector<std::vector<char>> lum_active;
    images.reserve(steps + 1);
    images.push_back(input);
    for (const auto& grid : grids) {
        const auto& prev = images.back();
        Plane theta = plan.slice(grid);
        Plane lum(prev.width(), prev.height());
        std::vector<char> active(npix);
        auto lv = lum.values();
        for (std::size_t i = 0; i < npix; ++i) {
            const double raw = lum_w[0] * prev[0].values()[i] + lum_w[1] * prev[1].values()[i] +
                               lum_w[2] * prev[2].values()[i];
            active[i] = raw > 0.0 && raw < 1.0;
            lv[i] = std::clamp(raw, 0.0, 1.0);
        }
        MultiPlane<3> next = prev;
        auto th = theta.values();
        for (int c = 0; c < 3; ++c) {
            auto dst = next[c].values();
            for (std::size_t i = 0; i < npix; ++i) dst[i] += th[i] * (1.0 - lv[i]) * dst[i];
        }
        images.push_back(std::move(next));
        thetas.push_back(std::move(theta));
        lums.push_back(std::move(lum));
        lum_active.push_back(std::move(active));
    }

    Objective obj;
    obj.exposure = exposure_loss(images.back(), cfg.delta);

    // d(exposure)/d(I_N) per channel.
    const double inv_2d2 = 1.0 / (2.0 * cfg.delta * cfg.delta);
    std::array<std::vector<double>, 3> g_img;
    for (auto& g : g_img) g.assign(npix, 0.0);
    {
        const auto& last = images.back();
        for (std::size_t i = 0; i < npix; ++i) {
            const double p = (last[0].values()[i] + last[1].values()[i] + last[2].values()[i]) / 3.0;
            const double d = p - 0.5;
            const double dp = std::exp(-d * d * inv_2d2) * d / (cfg.delta * cfg.delta) / npix;
            for (int c = 0; c < 3; ++c) g_img[c][i] = dp / 3.0;
        }
    }

    obj.gradient.assign(steps, BilateralGrid());
    Plane g_theta(input.width(), input.height());
    for (std::size_t n = steps; n-- > 0;) {
        const auto& prev = images[n];
        auto th = thetas[n].values();
        auto lv = lums[n].values();
        const auto& active = lum_active[n];
        auto gt = g_theta.values();
        for (std::size_t i = 0; i < npix; ++i) {
            double gth = 0.0, gl = 0.0;
            for (int c = 0; c < 3; ++c) {
                const double gp = g_img[c][i] * prev[c].values()[i];
                gth += gp * (1.0 - lv[i]);
                gl -= gp * th[i];
            }
            gt[i] = gth;
            const double gain = 1.0 + th[i] * (1.0 - lv[i]);
            const double gl_raw = active[i] ? gl : 0.0;
            for (int c = 0; c < 3; ++c) g_img[c][i] = g_img[c][i] * gain + gl_raw * lum_w[c];
        }
        obj.gradient[n] = plan.adjoint(g_theta);
    }

    for (std::size_t n = 0; n < steps; ++n) {
        obj.regularization += cfg.w_tv * grid_tv3(grids[n], &obj.gradient[n], cfg.w_tv);
        double sq = 0.0;
        auto b = grids[n].values();
        auto g = obj.gradient[n].values();
        for (std::size_t k = 0; k < b.size(); ++k) {
            sq += b[k] * b[k];
            g[k] += cfg.w_mag * 2.0 * b[k] / BilateralGrid::kCells;
        }
        obj.regularization += cfg.w_mag * sq / BilateralGrid::kCells;
    }
    obj.total = obj.exposure + obj.regularization;
    return obj;
}

inline Objective objective_and_gradient(const RgbImage& input, const GridSet& grids,
                                        const GuidanceMap& guidance, const CameraProfile& profile,
                                        const FitConfig& cfg) {
    detail::require_state(input, ColorState::CameraLinear, "objective_and_gradient");
    return objective_and_gradient(input.rgb, grids, SlicingPlan(guidance), luminance_weights(profile), cfg);
}

struct FitResult {
    GridSet grids;
    double objective = 0.0;  // best recorded
    double exposure = 0.0;   // exposure term at the best iterate
    std::vector<double> history;
};

// Momentum descent from zero grids; returns the best iterate seen.
//
// Each cell's gradient is divided by (support mass + 1/4096), where the
// support mass is the share of all slicing weight the cell receives. Raw
// per-cell gradients scale with that share, so without this the cells that
// cover a handful of pixels would barely move at the default step size.
inline FitResult fit_grids(const RgbImage& input, const CameraProfile& profile, const FitConfig& cfg = {}) {
    cfg.validate();
    detail::require_state(input, ColorState::CameraLinear, "fit_grids");
    const GuidanceMap guidance = make_guidance(input, profile);
    const SlicingPlan plan(guidance);
    const auto lum_w = luminance_weights(profile);

    BilateralGrid precond = plan.support_mass();
    for (double& v : precond.values()) v = 1.0 / (v + 1.0 / BilateralGrid::kCells);

    GridSet grids(cfg.iterations);
    GridSet velocity(cfg.iterations);
    FitResult result;
    result.objective = std::numeric_limits<double>::infinity();

    for (int step = 0; step <= cfg.steps; ++step) {
        Objective obj = objective_and_gradient(input.rgb, grids, plan, lum_w, cfg);
        if (!std::isfinite(obj.total)) {
            detail::fail("fit_grids: non-finite objective at optimizer step ", step,
                         " (exposure=", obj.exposure, ", regularization=", obj.regularization, ")");
        }
        result.history.push_back(obj.total);
        if (obj.total < result.objective) {
            result.objective = obj.total;
            result.exposure = obj.exposure;
            result.grids = grids;
        }
        if (step == cfg.steps) break;
        for (int n = 0; n < cfg.iterations; ++n) {
            auto v = velocity[n].values();
            auto b = grids[n].values();
            auto g = obj.gradient[n].values();
            for (std::size_t k = 0; k < v.size(); ++k) {
                v[k] = cfg.momentum * v[k] - cfg.step_size * precond[k] * g[k];
                b[k] += v[k];
            }
        }
    }
    return result;
}

} // namespace rawlume
