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

// Minimal ISP: normalization, CFA packing, bilinear demosaic, color
// conversion to sRGB, XYZ luminance and area downsampling.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "rawlume/error.hpp"
#include "rawlume/image.hpp"
#include "rawlume/parallel.hpp"
#include "rawlume/profile.hpp"

namespace rawlume {

// Maps digital numbers to [0, 1]: (dn - black) / (white - black). Values at or
// above the white level map to exactly 1. With clamp_low the result is floored
// at 0; calibration reads dark frames with clamp_low = false so that negative
// read-noise excursions survive.
inline RawImage normalize_raw(std::span<const std::uint16_t> dn, int width, int height,
                              const CameraProfile& profile, bool clamp_low = true) {
    profile.validate();
    detail::require(width % 2 == 0 && height % 2 == 0,
                    "raw dimensions must be even for the CFA tile, got ", width, "x", height);
    detail::require(dn.size() == static_cast<std::size_t>(width) * height,
                    "raw sample count ", dn.size(), " does not match ", width, "x", height);
    const double range = profile.white_level - profile.black_level;
    Plane out(width, height);
    auto dst = out.values();
    for (std::size_t i = 0; i < dn.size(); ++i) {
        const double v = static_cast<double>(dn[i]);
        double n = (v >= profile.white_level) ? 1.0 : (v - profile.black_level) / range;
        if (clamp_low) n = std::max(n, 0.0);
        dst[i] = n;
    }
    return RawImage(std::move(out), profile.cfa);
}

// Inverse of normalize_raw up to rounding: DN = round(black + v * (white - black)),
// clamped to the 16-bit range.
inline std::vector<std::uint16_t> denormalize_raw(const RawImage& raw, const CameraProfile& profile) {
    const double range = profile.white_level - profile.black_level;
    std::vector<std::uint16_t> out(raw.data.size());
    auto src = raw.data.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double dn = std::round(profile.black_level + src[i] * range);
        out[i] = static_cast<std::uint16_t>(std::clamp(dn, 0.0, 65535.0));
    }
    return out;
}

inline PackedImage pack_cfa(const RawImage& raw) {
    detail::require(raw.width() % 2 == 0 && raw.height() % 2 == 0,
                    "pack_cfa requires even dimensions");
    const int w = raw.width() / 2;
    const int h = raw.height() / 2;
    const auto tile = cfa_tile(raw.cfa);
    PackedImage out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx)
                    out[tile[dy][dx]](x, y) = raw.data(2 * x + dx, 2 * y + dy);
        }
    }
    return out;
}

// Packs any full-resolution per-site map (e.g. a variance map) with the same layout.
inline PackedImage pack_cfa(const Plane& plane, Cfa cfa) {
    return pack_cfa(RawImage(plane, cfa));
}

inline RawImage unpack_cfa(const PackedImage& packed, Cfa cfa) {
    const int w = packed.width();
    const int h = packed.height();
    const auto tile = cfa_tile(cfa);
    Plane out(2 * w, 2 * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx)
                    out(2 * x + dx, 2 * y + dy) = packed[tile[dy][dx]](x, y);
        }
    }
    return RawImage(std::move(out), cfa);
}

namespace detail {

// Mirror without repeating the border sample (-1 -> 1). Shifts by two keep the
// CFA parity, so the mirrored site carries the same color as the missing one.
inline int mirror101(int i, int n) {
    if (i < 0) return std::min(-i, n - 1);
    if (i >= n) return std::max(2 * n - 2 - i, 0);
    return i;
}

} // namespace detail

// Bilinear demosaic. Known samples pass through; a missing color is the mean of
// the nearest same-color sites (4-neighbors first, then diagonals).
inline RgbImage demosaic_bilinear(const RawImage& raw) {
    const int w = raw.width();
    const int h = raw.height();
    RgbImage out(w, h, ColorState::CameraLinear);
    static constexpr std::array<std::array<int, 2>, 4> kCross = {{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
    static constexpr std::array<std::array<int, 2>, 4> kDiag = {{{1, 1}, {-1, 1}, {1, -1}, {-1, -1}}};

    parallel_for(0, h, [&](int y) {
        for (int x = 0; x < w; ++x) {
            const int here = cfa_color(raw.cfa, x, y);
            for (int c = 0; c < 3; ++c) {
                if (c == here) {
                    out[c](x, y) = raw.data(x, y);
                    continue;
                }
                double sum = 0.0;
                int count = 0;
                for (const auto& ring : {kCross, kDiag}) {
                    for (const auto& d : ring) {
                        const int sx = detail::mirror101(x + d[0], w);
                        const int sy = detail::mirror101(y + d[1], h);
                        if (cfa_color(raw.cfa, sx, sy) == c) {
                            sum += raw.data(sx, sy);
                            ++count;
                        }
                    }
                    if (count > 0) break;
                }
                out[c](x, y) = sum / count;
            }
        }
    });
    return out;
}

// Half-resolution camera RGB straight from the packed planes, G = (G1+G2)/2.
inline RgbImage packed_to_rgb(const PackedImage& packed) {
    RgbImage out(packed.width(), packed.height(), ColorState::CameraLinear);
    auto r = packed[0].values();
    auto g1 = packed[1].values();
    auto g2 = packed[2].values();
    auto b = packed[3].values();
    auto orr = out[0].values();
    auto og = out[1].values();
    auto ob = out[2].values();
    for (std::size_t i = 0; i < r.size(); ++i) {
        orr[i] = r[i];
        og[i] = 0.5 * (g1[i] + g2[i]);
        ob[i] = b[i];
    }
    return out;
}

inline double srgb_encode(double linear) {
    if (linear <= 0.0031308) return 12.92 * linear;
    return 1.055 * std::pow(linear, 1.0 / 2.4) - 0.055;
}

inline double srgb_decode(double encoded) {
    if (encoded <= 0.04045) return encoded / 12.92;
    return std::pow((encoded + 0.055) / 1.055, 2.4);
}

namespace detail {

inline RgbImage apply_matrix(const RgbImage& img, const Matrix3& m, ColorState to) {
    RgbImage out(img.width(), img.height(), to);
    auto r = img[0].values();
    auto g = img[1].values();
    auto b = img[2].values();
    for (int c = 0; c < 3; ++c) {
        auto dst = out[c].values();
        for (std::size_t i = 0; i < dst.size(); ++i)
            dst[i] = m[c][0] * r[i] + m[c][1] * g[i] + m[c][2] * b[i];
    }
    return out;
}

inline void require_state(const RgbImage& img, ColorState expected, const char* op) {
    require(img.state == expected, op, ": expected color state ", to_string(expected), ", got ",
            to_string(img.state));
}

} // namespace detail

inline RgbImage camera_to_xyz(const RgbImage& img, const CameraProfile& profile) {
    detail::require_state(img, ColorState::CameraLinear, "camera_to_xyz");
    Matrix3 wb{};
    for (int i = 0; i < 3; ++i) wb[i][i] = profile.wb_gains[i];
    return detail::apply_matrix(img, multiply(profile.cam_to_xyz, wb), ColorState::Xyz);
}

inline RgbImage xyz_to_linear_srgb(const RgbImage& img) {
    detail::require_state(img, ColorState::Xyz, "xyz_to_linear_srgb");
    return detail::apply_matrix(img, kXyzToSrgb, ColorState::LinearSrgb);
}

inline RgbImage encode_srgb(RgbImage img) {
    detail::require_state(img, ColorState::LinearSrgb, "encode_srgb");
    for (auto& p : img.rgb.planes)
        for (double& v : p.values()) v = srgb_encode(v);
    img.state = ColorState::EncodedSrgb;
    return img;
}

inline RgbImage decode_srgb(RgbImage img) {
    detail::require_state(img, ColorState::EncodedSrgb, "decode_srgb");
    for (auto& p : img.rgb.planes)
        for (double& v : p.values()) v = srgb_decode(v);
    img.state = ColorState::LinearSrgb;
    return img;
}

// White balance, camera->XYZ, XYZ->linear sRGB, clamp to [0,1], optional encode.
inline RgbImage camera_to_srgb(const RgbImage& img, const CameraProfile& profile, bool encode) {
    detail::require_state(img, ColorState::CameraLinear, "camera_to_srgb");
    RgbImage lin = xyz_to_linear_srgb(camera_to_xyz(img, profile));
    lin.rgb = clamp01(std::move(lin.rgb));
    return encode ? encode_srgb(std::move(lin)) : lin;
}

template <std::size_t C>
Plane weighted_luminance(const MultiPlane<C>& img, const std::array<double, C>& weights) {
    Plane out(img.width(), img.height());
    auto dst = out.values();
    for (std::size_t c = 0; c < C; ++c) {
        auto src = img[c].values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += weights[c] * src[i];
    }
    for (double& v : dst) v = std::clamp(v, 0.0, 1.0);
    return out;
}

// Y of XYZ per pixel, clamped to [0,1].
inline Plane luminance_xyz(const RgbImage& img, const CameraProfile& profile) {
    detail::require_state(img, ColorState::CameraLinear, "luminance_xyz");
    return weighted_luminance(img.rgb, luminance_weights(profile));
}

inline Plane luminance_xyz(const PackedImage& packed, const CameraProfile& profile) {
    return weighted_luminance(packed, packed_luminance_weights(profile));
}

namespace detail {

struct AreaTap {
    int src;
    double weight;
};

// Overlap weights of each output cell with the source pixels along one axis.
inline std::vector<std::vector<AreaTap>> area_taps(int src, int dst) {
    std::vector<std::vector<AreaTap>> taps(dst);
    const double scale = static_cast<double>(src) / dst;
    for (int o = 0; o < dst; ++o) {
        const double lo = o * scale;
        const double hi = (o + 1) * scale;
        for (int s = static_cast<int>(std::floor(lo)); s < src && s < hi; ++s) {
            const double overlap = std::min(hi, s + 1.0) - std::max(lo, static_cast<double>(s));
            if (overlap > 0.0) taps[o].push_back({s, overlap / scale});
        }
    }
    return taps;
}

} // namespace detail

// Box (area-average) resampling to a smaller or equal size.
template <std::size_t C>
MultiPlane<C> downsample_area(const MultiPlane<C>& img, int target_width, int target_height) {
    detail::require(target_width >= 1 && target_height >= 1, "downsample_area: empty target");
    detail::require(target_width <= img.width() && target_height <= img.height(),
                    "downsample_area: cannot upscale ", img.width(), "x", img.height(), " to ",
                    target_width, "x", target_height);
    const auto tx = detail::area_taps(img.width(), target_width);
    const auto ty = detail::area_taps(img.height(), target_height);
    MultiPlane<C> out(target_width, target_height);
    for (std::size_t c = 0; c < C; ++c) {
        Plane horiz(target_width, img.height());
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < target_width; ++x) {
                double acc = 0.0;
                for (const auto& t : tx[x]) acc += t.weight * img[c](t.src, y);
                horiz(x, y) = acc;
            }
        for (int y = 0; y < target_height; ++y)
            for (int x = 0; x < target_width; ++x) {
                double acc = 0.0;
                for (const auto& t : ty[y]) acc += t.weight * horiz(x, t.src);
                out[c](x, y) = acc;
            }
    }
    return out;
}

inline RgbImage downsample_area(const RgbImage& img, int target_width = 256, int target_height = 256) {
    return RgbImage(downsample_area(img.rgb, target_width, target_height), img.state);
}

} // namespace rawlume
