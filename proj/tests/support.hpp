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

// Shared fixtures and brute-force oracles for the test suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "rawlume.hpp"

namespace rawlume::testing {

inline Plane random_plane(Rng& rng, int w, int h, double lo = 0.0, double hi = 1.0) {
    Plane p(w, h);
    for (double& v : p.values()) v = rng.uniform(lo, hi);
    return p;
}

template <std::size_t C>
MultiPlane<C> random_image(Rng& rng, int w, int h, double lo = 0.0, double hi = 1.0) {
    MultiPlane<C> img;
    for (auto& p : img.planes) p = random_plane(rng, w, h, lo, hi);
    return img;
}

inline RgbImage random_rgb(Rng& rng, int w, int h, ColorState state, double lo = 0.0, double hi = 1.0) {
    return RgbImage(random_image<3>(rng, w, h, lo, hi), state);
}

inline BilateralGrid random_grid(Rng& rng, double lo = -1.0, double hi = 1.0) {
    BilateralGrid g;
    for (double& v : g.values()) v = rng.uniform(lo, hi);
    return g;
}

inline GridSet random_grids(Rng& rng, int n, double lo = -1.0, double hi = 1.0) {
    GridSet set;
    for (int i = 0; i < n; ++i) set.push_back(random_grid(rng, lo, hi));
    return set;
}

// Triangle kernel summed over every cell of the grid.
inline double trilinear_oracle(const BilateralGrid& grid, int w, int h, int x, int y, double z) {
    const double last = BilateralGrid::kSize - 1;
    const double gx = w > 1 ? x * last / (w - 1) : 0.0;
    const double gy = h > 1 ? y * last / (h - 1) : 0.0;
    const double gz = std::clamp(z, 0.0, 1.0) * last;
    auto tau = [](double g, int i) { return std::max(0.0, 1.0 - std::abs(g - i)); };
    double acc = 0.0;
    for (int k = 0; k < BilateralGrid::kSize; ++k)
        for (int j = 0; j < BilateralGrid::kSize; ++j)
            for (int i = 0; i < BilateralGrid::kSize; ++i)
                acc += tau(gx, i) * tau(gy, j) * tau(gz, k) * grid(i, j, k);
    return acc;
}

// Smooth scene with edges and texture, values in [0.05, 0.95].
inline Plane scene_plane(int w, int h, double phase = 0.0) {
    Plane p(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double u = static_cast<double>(x) / w;
            const double v = static_cast<double>(y) / h;
            double s = 0.25 + 0.45 * u + 0.15 * std::sin(6.0 * v + phase) * std::cos(4.0 * u);
            if (std::hypot(u - 0.6, v - 0.4) < 0.2) s += 0.25;
            p(x, y) = std::clamp(s, 0.05, 0.95);
        }
    return p;
}

inline RawImage scene_raw(int w, int h, Cfa cfa = Cfa::RGGB, double phase = 0.0) {
    return RawImage(scene_plane(w, h, phase), cfa);
}

inline double dot(const Plane& a, const Plane& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.values()[i] * b.values()[i];
    return s;
}

inline double dot(const BilateralGrid& a, const BilateralGrid& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < BilateralGrid::kCells; ++i) s += a[i] * b[i];
    return s;
}

inline double max_abs_diff(const Plane& a, const Plane& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

inline double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double variance_of(std::span<const double> v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("rawlume_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

} // namespace rawlume::testing
