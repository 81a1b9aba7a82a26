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

// End-to-end flows used by the command-line tool: noise calibration, pair
// synthesis and low-light enhancement.

#include <algorithm>
#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rawlume/bilateral_grid.hpp"
#include "rawlume/coeff_optimizer.hpp"
#include "rawlume/color_transform.hpp"
#include "rawlume/enhancer.hpp"
#include "rawlume/error.hpp"
#include "rawlume/image.hpp"
#include "rawlume/joint_op.hpp"
#include "rawlume/noise_model.hpp"
#include "rawlume/profile.hpp"
#include "rawlume/raw_core.hpp"

namespace rawlume {

namespace detail {

// Runs fn, prefixing any library error with the stage name.
template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        fail(stage, ": ", e.what());
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------------

struct CalibrationReport {
    NoiseParams noise;
    BandingEstimate banding;
    TukeyFit read_noise;
    GainFit gain;
};

// darks are normalized without the low clamp; flats come in equal-exposure pairs.
inline CalibrationReport calibrate_noise(const std::vector<RawImage>& darks,
                                         const std::vector<std::pair<RawImage, RawImage>>& flats,
                                         const CameraProfile& profile, const PpccOptions& ppcc = {}) {
    CalibrationReport report;
    report.banding = detail::run_stage("estimate_banding", [&] { return estimate_banding(darks); });
    report.read_noise = detail::run_stage("estimate_tukey_ppcc", [&] { return estimate_tukey_ppcc(darks, ppcc); });
    report.gain = detail::run_stage("estimate_gain_photon_transfer",
                                    [&] { return estimate_gain_photon_transfer(flats); });
    report.noise.kappa = std::max(report.gain.kappa, 0.0);
    report.noise.lambda_r = report.read_noise.lambda_r;
    report.noise.sigma_r = report.read_noise.sigma_r;
    report.noise.sigma_b = report.banding.sigma_b;
    report.noise.s = profile.quantization_step();
    return report;
}

// ---------------------------------------------------------------------------
// Synthesis
// ---------------------------------------------------------------------------

struct SynthPair {
    RawImage noisy;
    RawImage clean;  // darkened, noise-free
    double factor = 1.0;
};

inline SynthPair synthesize_pair(const RawImage& clean, const NoiseParams& noise, double factor_lo,
                                 double factor_hi, std::uint64_t seed) {
    Rng rng(seed);
    SynthPair pair;
    pair.factor = draw_darken_factor(rng, factor_lo, factor_hi);
    pair.clean = darken(clean, pair.factor);
    pair.noisy = sample_noise(pair.clean, noise, rng);
    return pair;
}

// ---------------------------------------------------------------------------
// Enhancement
// ---------------------------------------------------------------------------

struct EnhanceOptions {
    FitConfig fit;
    DenoiseConfig denoise;
    bool denoise_enabled = true;
    bool color_enabled = true;
    std::optional<ColorMatrix> color;  // identity on the default expansion when unset
    std::optional<GridSet> grids;      // skips fitting when given
    int lowres_size = 256;
};

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct EnhanceResult {
    PackedImage input;
    PackedImage output;  // clamped to [0,1]
    RgbImage srgb;       // encoded sRGB after the color transform
    GridSet grids;
    double fit_objective = 0.0;
    double input_exposure_loss = 0.0;
    double output_exposure_loss = 0.0;
    std::vector<StageTiming> timings;
};

// Low-resolution branch input: packed planes as camera RGB, area-downsampled
// to at most lowres_size on each side.
inline RgbImage lowres_input(const PackedImage& packed, int lowres_size) {
    const RgbImage half = packed_to_rgb(packed);
    return downsample_area(half, std::min(lowres_size, half.width()), std::min(lowres_size, half.height()));
}

inline EnhanceResult enhance_raw(const RawImage& raw, const CameraProfile& profile, const EnhanceOptions& opts = {}) {
    using clock = std::chrono::steady_clock;
    EnhanceResult result;
    auto timed = [&](const char* stage, auto&& fn) {
        const auto t0 = clock::now();
        auto value = detail::run_stage(stage, fn);
        result.timings.push_back({stage, std::chrono::duration<double>(clock::now() - t0).count()});
        return value;
    };

    result.input = timed("pack", [&] {
        profile.validate();
        return pack_cfa(raw);
    });
    const RgbImage lowres = timed("downsample", [&] { return lowres_input(result.input, opts.lowres_size); });
    result.grids = timed("fit", [&] {
        if (opts.grids) {
            detail::require(!opts.grids->empty(), "need at least one grid (N >= 1)");
            for (const auto& g : *opts.grids) detail::require(g.all_finite(), "grid coefficients must be finite");
            return *opts.grids;
        }
        FitResult fit = fit_grids(lowres, profile, opts.fit);
        result.fit_objective = fit.objective;
        return std::move(fit.grids);
    });
    result.output = timed(opts.denoise_enabled ? "joint" : "enhance", [&] {
        if (opts.denoise_enabled) return joint_run(raw, result.grids, profile, opts.denoise);
        const GuidanceMap guidance = make_guidance(result.input, profile);
        auto trace = enhance_progressive(result.input, result.grids, guidance, profile);
        return clamp_output(std::move(trace.images.back()));
    });
    result.srgb = timed("convert", [&] {
        return camera_to_srgb(demosaic_bilinear(unpack_cfa(result.output, raw.cfa)), profile, true);
    });
    if (opts.color_enabled) {
        result.srgb = timed("color", [&] {
            const ColorMatrix m = opts.color ? *opts.color : ColorMatrix::identity(PolySpec{});
            return apply_color(result.srgb, m);
        });
    }
    result.input_exposure_loss = exposure_loss(packed_to_rgb(result.input), opts.fit.delta);
    result.output_exposure_loss = exposure_loss(packed_to_rgb(result.output), opts.fit.delta);
    return result;
}

} // namespace rawlume
