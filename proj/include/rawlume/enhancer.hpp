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

// Progressive illumination adjustment without denoising:
//   R_n = theta_n * (1 - L_{n-1}) * I_{n-1},   I_n = I_{n-1} + R_n
// so I_N = I_0 + R_1 + ... + R_N. No clipping happens between iterations.

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "rawlume/bilateral_grid.hpp"
#include "rawlume/error.hpp"
#include "rawlume/image.hpp"
#include "rawlume/profile.hpp"
#include "rawlume/raw_core.hpp"

namespace rawlume {

inline constexpr int kDefaultIterations = 9;

template <std::size_t C>
struct IterationTrace {
    std::vector<MultiPlane<C>> images;     // I_0 .. I_N
    std::vector<MultiPlane<C>> residuals;  // R_1 .. R_N

    const MultiPlane<C>& final_image() const { return images.back(); }
};

template <std::size_t C>
struct StepResult {
    MultiPlane<C> next;
    MultiPlane<C> residual;
};

template <std::size_t C>
StepResult<C> enhance_step(const MultiPlane<C>& prev, const Plane& theta, const Plane& luminance) {
    detail::require(theta.same_shape(prev[0]) && luminance.same_shape(prev[0]),
                    "enhance_step: geometry mismatch between image, coefficients and luminance");
    StepResult<C> out{prev, MultiPlane<C>(prev.width(), prev.height())};
    auto th = theta.values();
    auto lum = luminance.values();
    for (double l : lum) {
        detail::require(l >= 0.0 && l <= 1.0, "enhance_step: luminance must lie in [0,1], got ", l);
    }
    for (std::size_t c = 0; c < C; ++c) {
        auto src = prev[c].values();
        auto res = out.residual[c].values();
        auto dst = out.next[c].values();
        for (std::size_t i = 0; i < src.size(); ++i) {
            res[i] = th[i] * (1.0 - lum[i]) * src[i];
            dst[i] = src[i] + res[i];
        }
    }
    return out;
}

template <std::size_t C>
IterationTrace<C> enhance_progressive(const MultiPlane<C>& input, const GridSet& grids,
                                      const GuidanceMap& guidance,
                                      const std::array<double, C>& luminance_weights) {
    detail::require(!grids.empty(), "enhance_progressive: need at least one grid (N >= 1)");
    detail::require(guidance.z.same_shape(input[0]), "enhance_progressive: guidance geometry mismatch");
    const SlicingPlan plan(guidance);
    IterationTrace<C> trace;
    trace.images.reserve(grids.size() + 1);
    trace.residuals.reserve(grids.size());
    trace.images.push_back(input);
    for (const auto& grid : grids) {
        const auto& prev = trace.images.back();
        const Plane theta = plan.slice(grid);
        const Plane lum = weighted_luminance(prev, luminance_weights);
        auto step = enhance_step(prev, theta, lum);
        trace.residuals.push_back(std::move(step.residual));
        trace.images.push_back(std::move(step.next));
    }
    return trace;
}

inline IterationTrace<4> enhance_progressive(const PackedImage& input, const GridSet& grids,
                                             const GuidanceMap& guidance, const CameraProfile& profile) {
    return enhance_progressive(input, grids, guidance, packed_luminance_weights(profile));
}

inline IterationTrace<3> enhance_progressive(const RgbImage& input, const GridSet& grids,
                                             const GuidanceMap& guidance, const CameraProfile& profile) {
    detail::require_state(input, ColorState::CameraLinear, "enhance_progressive");
    return enhance_progressive(input.rgb, grids, guidance, luminance_weights(profile));
}

template <std::size_t C>
MultiPlane<C> clamp_output(MultiPlane<C> img) {
    return clamp01(std::move(img));
}

} // namespace rawlume
