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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include "rawlume/error.hpp"
#include "rawlume/image.hpp"

namespace rawlume {

inline constexpr double kPsnrCap = 100.0;

// 10 log10(1 / MSE) over every channel, capped at 100 dB.
template <std::size_t C>
double psnr(const MultiPlane<C>& a, const MultiPlane<C>& b) {
    detail::require(a.same_shape(b), "psnr: geometry mismatch");
    double se = 0.0;
    std::size_t n = 0;
    for (std::size_t c = 0; c < C; ++c) {
        auto va = a[c].values();
        auto vb = b[c].values();
        for (std::size_t i = 0; i < va.size(); ++i) {
            const double d = va[i] - vb[i];
            se += d * d;
        }
        n += va.size();
    }
    detail::require(n > 0, "psnr: empty images");
    const double mse = se / static_cast<double>(n);
    if (mse <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

inline double psnr(const RgbImage& a, const RgbImage& b) { return psnr(a.rgb, b.rgb); }

template <std::size_t C>
Plane channel_mean(const MultiPlane<C>& img) {
    Plane out(img.width(), img.height());
    auto dst = out.values();
    for (std::size_t c = 0; c < C; ++c) {
        auto src = img[c].values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
    for (double& v : dst) v /= static_cast<double>(C);
    return out;
}

inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

// Mean SSIM over every 8x8 window position (stride 1) of the channel-mean gray
// image. Images smaller than 8 use a window as large as the image.
template <std::size_t C>
double ssim(const MultiPlane<C>& a, const MultiPlane<C>& b) {
    detail::require(a.same_shape(b), "ssim: geometry mismatch");
    detail::require(a.width() > 0 && a.height() > 0, "ssim: empty images");
    const Plane x = channel_mean(a);
    const Plane y = channel_mean(b);
    const int wx = std::min(8, x.width());
    const int wy = std::min(8, x.height());
    const double count = static_cast<double>(wx) * wy;
    double total = 0.0;
    int windows = 0;
    for (int oy = 0; oy + wy <= x.height(); ++oy) {
        for (int ox = 0; ox + wx <= x.width(); ++ox) {
            double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
            for (int j = oy; j < oy + wy; ++j)
                for (int i = ox; i < ox + wx; ++i) {
                    const double u = x(i, j), v = y(i, j);
                    sx += u;
                    sy += v;
                    sxx += u * u;
                    syy += v * v;
                    sxy += u * v;
                }
            const double mx = sx / count, my = sy / count;
            const double vx = std::max(sxx / count - mx * mx, 0.0);
            const double vy = std::max(syy / count - my * my, 0.0);
            const double cxy = sxy / count - mx * my;
            total += ((2 * mx * my + kSsimC1) * (2 * cxy + kSsimC2)) /
                     ((mx * mx + my * my + kSsimC1) * (vx + vy + kSsimC2));
            ++windows;
        }
    }
    return total / windows;
}

inline double ssim(const RgbImage& a, const RgbImage& b) { return ssim(a.rgb, b.rgb); }

// Shannon entropy (bits) of the 256-level histogram of the channel-mean gray image.
template <std::size_t C>
double entropy(const MultiPlane<C>& img) {
    const Plane gray = channel_mean(img);
    std::array<double, 256> hist{};
    for (double v : gray.values()) {
        const long bin = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
        hist[static_cast<std::size_t>(bin)] += 1.0;
    }
    const double n = static_cast<double>(gray.size());
    if (n == 0.0) return 0.0;
    double h = 0.0;
    for (double c : hist) {
        if (c > 0.0) {
            const double p = c / n;
            h -= p * std::log2(p);
        }
    }
    return std::max(h, 0.0);
}

inline double entropy(const RgbImage& img) { return entropy(img.rgb); }

} // namespace rawlume
