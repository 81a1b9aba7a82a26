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

// Builds a synthetic scene, darkens it with calibrated-style noise, enhances
// it with and without the joint denoiser and prints the metrics.

#include <cmath>
#include <cstdio>

#include "rawlume.hpp"

using namespace rawlume;

int main() {
    CameraProfile profile;
    profile.white_level = 16383;
    profile.noise = {0.002, 0.2, 0.015, 0.010, profile.quantization_step()};

    const int w = 256, h = 192;
    RawImage scene(Plane(w, h), Cfa::RGGB);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double base = 0.15 + 0.7 * x / (w - 1.0);
            const double stripe = (y / 24) % 2 ? 0.1 : -0.1;
            scene.data(x, y) = std::clamp(base + stripe, 0.0, 1.0);
        }

    const SynthPair pair = synthesize_pair(scene, profile.noise, 8.0, 8.0, 7);
    std::printf("darkening factor %.1f\n", pair.factor);

    EnhanceOptions opts;
    opts.color_enabled = false;
    const EnhanceResult joint = enhance_raw(pair.noisy, profile, opts);
    opts.denoise_enabled = false;
    opts.grids = joint.grids;
    const EnhanceResult plain = enhance_raw(pair.noisy, profile, opts);

    const RgbImage reference = camera_to_srgb(demosaic_bilinear(scene), profile, true);
    for (const auto* r : {&joint, &plain}) {
        std::printf("%-10s exposure %.4f -> %.4f  entropy %.3f  psnr vs scene %.2f dB\n",
                    r == &joint ? "joint" : "no-denoise", r->input_exposure_loss, r->output_exposure_loss,
                    entropy(r->srgb), psnr(r->srgb, reference));
    }
    write_ppm("low_light_demo.ppm", joint.srgb);
    return 0;
}
