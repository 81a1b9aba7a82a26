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
#include <vector>

#include "rawlume/error.hpp"
#include "rawlume/image.hpp"
#include "rawlume/parallel.hpp"
#include "rawlume/profile.hpp"
#include "rawlume/raw_core.hpp"

namespace rawlume {

// 16x16x16 scalar coefficient lattice over (x, y, guidance).
// Flat layout: x fastest, then y, then z.
class BilateralGrid {
public:
    static constexpr int kSize = 16;
    static constexpr int kCells = kSize * kSize * kSize;

    BilateralGrid() : cells_(kCells, 0.0) {}
    explicit BilateralGrid(double fill) : cells_(kCells, fill) {}

    static constexpr int index(int i, int j, int k) { return (k * kSize + j) * kSize + i; }

    double& operator()(int i, int j, int k) { return cells_[index(i, j, k)]; }
    double operator()(int i, int j, int k) const { return cells_[index(i, j, k)]; }
    double& operator[](std::size_t n) { return cells_[n]; }
    double operator[](std::size_t n) const { return cells_[n]; }

    std::span<double> values() { return cells_; }
    std::span<const double> values() const { return cells_; }

    bool all_finite() const {
        return std::all_of(cells_.begin(), cells_.end(), [](double v) { return std::isfinite(v); });
    }

    bool operator==(const BilateralGrid&) const = default;

private:
    std::vector<double> cells_;
};

// One grid per progressive iteration.
using GridSet = std::vector<BilateralGrid>;

// Per-pixel z in [0,1] selecting the intensity-axis position during slicing.
struct GuidanceMap {
    Plane z;

    GuidanceMap() = default;
    explicit GuidanceMap(Plane plane) : z(clamp01(std::move(plane))) {
        for (double v : z.values()) detail::require(std::isfinite(v), "guidance values must be finite");
    }

    int width() const { return z.width(); }
    int height() const { return z.height(); }
};

// Guidance from the (denoised) base image: its clamped XYZ luminance.
inline GuidanceMap make_guidance(const PackedImage& base, const CameraProfile& profile) {
    return GuidanceMap(luminance_xyz(base, profile));
}

inline GuidanceMap make_guidance(const RgbImage& base, const CameraProfile& profile) {
    return GuidanceMap(luminance_xyz(base, profile));
}

// Trilinear taps of every pixel. Grid nodes sit at the image corners:
// gx = x * 15 / (W - 1), gy likewise, gz = z * 15.
class SlicingPlan {
public:
    struct Taps {
        std::array<int, 8> cell;
        std::array<double, 8> weight;
    };

    explicit SlicingPlan(const GuidanceMap& guidance)
        : width_(guidance.width()), height_(guidance.height()),
          taps_(static_cast<std::size_t>(width_) * height_) {
        constexpr int last = BilateralGrid::kSize - 1;
        auto axis = [last](double g, int& i0, int& i1, double& f) {
            g = std::clamp(g, 0.0, static_cast<double>(last));
            i0 = std::min(static_cast<int>(std::floor(g)), last);
            i1 = std::min(i0 + 1, last);
            f = g - i0;
        };
        for (int y = 0; y < height_; ++y) {
            const double gy = height_ > 1 ? static_cast<double>(y) * last / (height_ - 1) : 0.0;
            int j0, j1;
            double fy;
            axis(gy, j0, j1, fy);
            for (int x = 0; x < width_; ++x) {
                const double gx = width_ > 1 ? static_cast<double>(x) * last / (width_ - 1) : 0.0;
                const double gz = guidance.z(x, y) * last;
                int i0, i1, k0, k1;
                double fx, fz;
                axis(gx, i0, i1, fx);
                axis(gz, k0, k1, fz);
                Taps& t = taps_[static_cast<std::size_t>(y) * width_ + x];
                int n = 0;
                for (int dk = 0; dk < 2; ++dk)
                    for (int dj = 0; dj < 2; ++dj)
                        for (int di = 0; di < 2; ++di) {
                            t.cell[n] = BilateralGrid::index(di ? i1 : i0, dj ? j1 : j0, dk ? k1 : k0);
                            t.weight[n] = (di ? fx : 1.0 - fx) * (dj ? fy : 1.0 - fy) * (dk ? fz : 1.0 - fz);
                            ++n;
                        }
            }
        }
    }

    int width() const { return width_; }
    int height() const { return height_; }
    const Taps& taps(int x, int y) const { return taps_[static_cast<std::size_t>(y) * width_ + x]; }

    Plane slice(const BilateralGrid& grid) const {
        Plane out(width_, height_);
        parallel_for(0, height_, [&](int y) {
            for (int x = 0; x < width_; ++x) {
                const Taps& t = taps(x, y);
                double acc = 0.0;
                for (int n = 0; n < 8; ++n) acc += t.weight[n] * grid[t.cell[n]];
                out(x, y) = acc;
            }
        });
        return out;
    }

    // Scatter with the slicing weights: gradient of sum(cotangent * slice(G)) w.r.t. G.
    // Sequential so the accumulation order never changes.
    BilateralGrid adjoint(const Plane& cotangent) const {
        detail::require(cotangent.width() == width_ && cotangent.height() == height_,
                        "slice_adjoint: cotangent geometry ", cotangent.width(), "x", cotangent.height(),
                        " does not match guidance ", width_, "x", height_);
        BilateralGrid out;
        for (int y = 0; y < height_; ++y)
            for (int x = 0; x < width_; ++x) {
                const double c = cotangent(x, y);
                if (c == 0.0) continue;
                const Taps& t = taps(x, y);
                for (int n = 0; n < 8; ++n) out[t.cell[n]] += t.weight[n] * c;
            }
        return out;
    }

    // Fraction of the total slicing weight landing on each cell (sums to 1).
    BilateralGrid support_mass() const {
        BilateralGrid out;
        for (const auto& t : taps_)
            for (int n = 0; n < 8; ++n) out[t.cell[n]] += t.weight[n];
        const double total = static_cast<double>(taps_.size());
        for (double& v : out.values()) v /= total;
        return out;
    }

private:
    int width_;
    int height_;
    std::vector<Taps> taps_;
};

inline Plane slice(const BilateralGrid& grid, const GuidanceMap& guidance) {
    return SlicingPlan(guidance).slice(grid);
}

inline BilateralGrid slice_adjoint(const GuidanceMap& guidance, const Plane& cotangent) {
    detail::require(cotangent.same_shape(guidance.z), "slice_adjoint: geometry mismatch");
    return SlicingPlan(guidance).adjoint(cotangent);
}

} // namespace rawlume
