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

// Full-resolution joint enhancement and denoising on the packed planes.
//
// Each iteration adds the enhancement residual and then denoises the
// candidate with a joint-bilateral filter whose range sigma tracks the noise
// the enhancement has amplified so far:
//   sigma_range = range_scale * A_n * sqrt(V)
//   A_n = A_{n-1} * (1 + theta_n * (1 - L_{n-1}))

#include <cmath>
#include <cstddef>
#include <vector>

#include "rawlume/bilateral_grid.hpp"
#include "rawlume/enhancer.hpp"
#include "rawlume/error.hpp"
#include "rawlume/image.hpp"
#include "rawlume/noise_model.hpp"
#include "rawlume/parallel.hpp"
#include "rawlume/profile.hpp"
#include "rawlume/raw_core.hpp"

namespace rawlume {

struct DenoiseConfig {
    int radius = 2;
    double range_scale = 2.0;
    // Below this noise standard deviation a pixel passes through untouched.
    double bypass_sigma = 1e-6;
};

template <std::size_t C>
MultiPlane<C> denoise_variance_guided(const MultiPlane<C>& img, const MultiPlane<C>& variance,
                                      const Plane& gain, const DenoiseConfig& cfg = {}) {
    detail::require(variance.same_shape(img) && gain.same_shape(img[0]),
                    "denoise_variance_guided: geometry mismatch");
    detail::require(cfg.radius >= 1, "denoise radius must be >= 1");
    for (const auto& p : variance.planes)
        for (double v : p.values())
            detail::require(v >= 0.0 && std::isfinite(v), "variance map must be finite and >= 0, got ", v);
    for (double g : gain.values())
        detail::require(g >= 0.0 && std::isfinite(g), "amplification must be finite and >= 0, got ", g);

    const int r = cfg.radius;
    const int side = 2 * r + 1;
    const double sigma_s = r / 2.0;
    std::vector<double> spatial(static_cast<std::size_t>(side) * side);
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
            spatial[(dy + r) * side + (dx + r)] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma_s * sigma_s));

    MultiPlane<C> out = img;
    const int w = img.width();
    const int h = img.height();
    for (std::size_t c = 0; c < C; ++c) {
        const Plane& src = img[c];
        Plane& dst = out[c];
        parallel_for(0, h, [&](int y) {
            for (int x = 0; x < w; ++x) {
                const double sigma = gain(x, y) * std::sqrt(variance[c](x, y));
                if (sigma < cfg.bypass_sigma) continue;
                const double range = cfg.range_scale * sigma;
                const double inv = 1.0 / (2.0 * range * range);
                const double center = src(x, y);
                double acc = 0.0, norm = 0.0;
                for (int dy = -r; dy <= r; ++dy)
                    for (int dx = -r; dx <= r; ++dx) {
                        const double v = src.clamped(x + dx, y + dy);
                        const double d = v - center;
                        const double wgt = spatial[(dy + r) * side + (dx + r)] * std::exp(-d * d * inv);
                        acc += wgt * v;
                        norm += wgt;
                    }
                dst(x, y) = acc / norm;
            }
        });
    }
    return out;
}

struct JointState {
    PackedImage base;      // denoised input I_0^U
    PackedImage current;   // I_n^U
    Plane amplification;   // A_n
    int iteration = 0;
};

inline JointState joint_init(const PackedImage& noisy, const PackedImage& variance,
                             const DenoiseConfig& cfg = {}) {
    detail::require(noisy.same_shape(variance), "joint_init: variance geometry mismatch");
    JointState state;
    state.amplification = Plane(noisy.width(), noisy.height(), 1.0);
    state.base = denoise_variance_guided(noisy, variance, state.amplification, cfg);
    state.current = state.base;
    return state;
}

inline JointState joint_init(const RawImage& noisy, const VarianceMap& variance,
                             const DenoiseConfig& cfg = {}) {
    detail::require(noisy.data.same_shape(variance.v), "joint_init: variance geometry mismatch");
    return joint_init(pack_cfa(noisy), pack_cfa(variance.v, noisy.cfa), cfg);
}

inline JointState joint_step(const JointState& state, const Plane& theta, const PackedImage& variance,
                             const CameraProfile& profile, const DenoiseConfig& cfg = {}) {
    detail::require(theta.same_shape(state.current[0]) && variance.same_shape(state.current),
                    "joint_step: geometry mismatch");
    const Plane lum = luminance_xyz(state.current, profile);
    auto step = enhance_step(state.current, theta, lum);

    JointState next;
    next.base = state.base;
    next.iteration = state.iteration + 1;
    next.amplification = state.amplification;
    auto amp = next.amplification.values();
    auto th = theta.values();
    auto l = lum.values();
    for (std::size_t i = 0; i < amp.size(); ++i) amp[i] *= 1.0 + th[i] * (1.0 - l[i]);
    next.current = denoise_variance_guided(step.next, variance, next.amplification, cfg);
    return next;
}

// Guidance is taken once from I_0^U and reused for every iteration.
inline PackedImage joint_run(const RawImage& noisy, const VarianceMap& variance, const GridSet& grids,
                             const CameraProfile& profile, const DenoiseConfig& cfg = {}) {
    detail::require(!grids.empty(), "joint_run: need at least one grid (N >= 1)");
    const PackedImage packed_var = pack_cfa(variance.v, noisy.cfa);
    JointState state = joint_init(pack_cfa(noisy), packed_var, cfg);
    const SlicingPlan plan(make_guidance(state.base, profile));
    for (const auto& grid : grids) {
        state = joint_step(state, plan.slice(grid), packed_var, profile, cfg);
    }
    return clamp_output(std::move(state.current));
}

// Variance predicted from the profile's noise parameters, using the clamped
// noisy frame as the signal estimate.
inline PackedImage joint_run(const RawImage& noisy, const GridSet& grids, const CameraProfile& profile,
                             const DenoiseConfig& cfg = {}) {
    RawImage estimate(clamp01(noisy.data), noisy.cfa);
    return joint_run(noisy, variance_map(estimate, profile.noise), grids, profile, cfg);
}

} // namespace rawlume
