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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rawlume/error.hpp"

namespace rawlume {

// Single channel of doubles, row-major.
class Plane {
public:
    Plane() = default;
    Plane(int width, int height, double fill = 0.0)
        : width_(width), height_(height),
          data_(static_cast<std::size_t>(checked_area(width, height)), fill) {}

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(int x, int y) { return data_[index(x, y)]; }
    double operator()(int x, int y) const { return data_[index(x, y)]; }

    // Edge-replicated read.
    double clamped(int x, int y) const {
        x = std::clamp(x, 0, width_ - 1);
        y = std::clamp(y, 0, height_ - 1);
        return data_[index(x, y)];
    }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }
    std::span<double> row(int y) {
        return std::span<double>(data_).subspan(static_cast<std::size_t>(y) * width_, width_);
    }
    std::span<const double> row(int y) const {
        return std::span<const double>(data_).subspan(static_cast<std::size_t>(y) * width_, width_);
    }

    bool same_shape(const Plane& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    bool operator==(const Plane&) const = default;

private:
    static long long checked_area(int w, int h) {
        detail::require(w >= 0 && h >= 0, "negative plane dimensions ", w, "x", h);
        return static_cast<long long>(w) * h;
    }
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * width_ + x;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

// C co-registered planes of equal geometry.
template <std::size_t C>
struct MultiPlane {
    static constexpr std::size_t channels = C;
    std::array<Plane, C> planes;

    MultiPlane() = default;
    MultiPlane(int width, int height, double fill = 0.0) {
        for (auto& p : planes) p = Plane(width, height, fill);
    }

    int width() const { return planes[0].width(); }
    int height() const { return planes[0].height(); }
    Plane& operator[](std::size_t c) { return planes[c]; }
    const Plane& operator[](std::size_t c) const { return planes[c]; }

    bool same_shape(const MultiPlane& other) const {
        return planes[0].same_shape(other.planes[0]);
    }
    bool operator==(const MultiPlane&) const = default;
};

// Half-resolution packed mosaic, always ordered (R, G1, G2, B) whatever the CFA.
using PackedImage = MultiPlane<4>;

enum class Cfa { RGGB, BGGR, GRBG, GBRG };

inline std::string_view to_string(Cfa cfa) {
    switch (cfa) {
        case Cfa::RGGB: return "RGGB";
        case Cfa::BGGR: return "BGGR";
        case Cfa::GRBG: return "GRBG";
        case Cfa::GBRG: return "GBRG";
    }
    return "RGGB";
}

inline Cfa cfa_from_string(std::string_view s) {
    if (s == "RGGB") return Cfa::RGGB;
    if (s == "BGGR") return Cfa::BGGR;
    if (s == "GRBG") return Cfa::GRBG;
    if (s == "GBRG") return Cfa::GBRG;
    detail::fail("unknown CFA layout '", std::string(s), "'");
}

// Packed plane index (0=R, 1=G1, 2=G2, 3=B) for each site of the 2x2 tile,
// indexed [dy][dx].
inline std::array<std::array<int, 2>, 2> cfa_tile(Cfa cfa) {
    switch (cfa) {
        case Cfa::RGGB: return {{{0, 1}, {2, 3}}};
        case Cfa::BGGR: return {{{3, 1}, {2, 0}}};
        case Cfa::GRBG: return {{{1, 0}, {3, 2}}};
        case Cfa::GBRG: return {{{1, 3}, {0, 2}}};
    }
    return {{{0, 1}, {2, 3}}};
}

// Color (0=R, 1=G, 2=B) sampled at full-resolution site (x, y).
inline int cfa_color(Cfa cfa, int x, int y) {
    static constexpr std::array<int, 4> plane_color = {0, 1, 1, 2};
    return plane_color[cfa_tile(cfa)[y & 1][x & 1]];
}

struct RawImage {
    Plane data;
    Cfa cfa = Cfa::RGGB;

    RawImage() = default;
    RawImage(Plane plane, Cfa layout) : data(std::move(plane)), cfa(layout) {
        detail::require(data.width() % 2 == 0 && data.height() % 2 == 0,
                        "raw dimensions must be even, got ", data.width(), "x", data.height());
    }

    int width() const { return data.width(); }
    int height() const { return data.height(); }
};

enum class ColorState { CameraLinear, Xyz, LinearSrgb, EncodedSrgb };

inline std::string_view to_string(ColorState s) {
    switch (s) {
        case ColorState::CameraLinear: return "camera-linear";
        case ColorState::Xyz: return "xyz";
        case ColorState::LinearSrgb: return "linear-srgb";
        case ColorState::EncodedSrgb: return "encoded-srgb";
    }
    return "camera-linear";
}

struct RgbImage {
    MultiPlane<3> rgb;
    ColorState state = ColorState::CameraLinear;

    RgbImage() = default;
    RgbImage(int width, int height, ColorState s, double fill = 0.0)
        : rgb(width, height, fill), state(s) {}
    RgbImage(MultiPlane<3> planes, ColorState s) : rgb(std::move(planes)), state(s) {}

    int width() const { return rgb.width(); }
    int height() const { return rgb.height(); }
    Plane& operator[](std::size_t c) { return rgb[c]; }
    const Plane& operator[](std::size_t c) const { return rgb[c]; }
};

template <std::size_t C>
MultiPlane<C> clamp01(MultiPlane<C> img) {
    for (auto& p : img.planes) {
        for (double& v : p.values()) v = std::clamp(v, 0.0, 1.0);
    }
    return img;
}

inline Plane clamp01(Plane p) {
    for (double& v : p.values()) v = std::clamp(v, 0.0, 1.0);
    return p;
}

template <std::size_t C>
double max_abs_diff(const MultiPlane<C>& a, const MultiPlane<C>& b) {
    detail::require(a.same_shape(b), "max_abs_diff: geometry mismatch");
    double m = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
        auto va = a[c].values();
        auto vb = b[c].values();
        for (std::size_t i = 0; i < va.size(); ++i) m = std::max(m, std::abs(va[i] - vb[i]));
    }
    return m;
}

} // namespace rawlume
