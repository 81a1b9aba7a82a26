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

#include <array>
#include <cmath>

#include "rawlume/error.hpp"
#include "rawlume/image.hpp"

namespace rawlume {

using Matrix3 = std::array<std::array<double, 3>, 3>;

inline constexpr Matrix3 kIdentity3 = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

// Linear sRGB (D65) to XYZ.
inline constexpr Matrix3 kSrgbToXyz = {{{0.4124564, 0.3575761, 0.1804375},
                                        {0.2126729, 0.7151522, 0.0721750},
                                        {0.0193339, 0.1191920, 0.9503041}}};

// XYZ to linear sRGB (D65).
inline constexpr Matrix3 kXyzToSrgb = {{{3.2404542, -1.5371385, -0.4985314},
                                        {-0.9692660, 1.8760108, 0.0415560},
                                        {0.0556434, -0.2040259, 1.0572252}}};

inline double determinant(const Matrix3& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

inline Matrix3 inverse(const Matrix3& m) {
    const double det = determinant(m);
    detail::require(std::abs(det) > 1e-12, "matrix is not invertible");
    Matrix3 r{};
    r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
    r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
    r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
    r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
    r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
    r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
    r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
    r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
    r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
    return r;
}

inline Matrix3 multiply(const Matrix3& a, const Matrix3& b) {
    Matrix3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
    return r;
}

// Sensor noise at one operating point, all in normalized DN.
//   kappa     conversion gain (normalized DN per electron)
//   lambda_r  Tukey-lambda shape of the read noise
//   sigma_r   read-noise standard deviation
//   sigma_b   per-row banding standard deviation
//   s         quantization step
// A zero kappa or s switches that source off.
struct NoiseParams {
    double kappa = 0.0;
    double lambda_r = 0.0;
    double sigma_r = 0.0;
    double sigma_b = 0.0;
    double s = 0.0;

    bool is_zero() const {
        return kappa == 0.0 && sigma_r == 0.0 && sigma_b == 0.0 && s == 0.0;
    }

    void validate() const {
        const bool finite = std::isfinite(kappa) && std::isfinite(lambda_r) &&
                            std::isfinite(sigma_r) && std::isfinite(sigma_b) && std::isfinite(s);
        detail::require(finite, "noise parameters must be finite");
        detail::require(kappa >= 0.0, "kappa must be >= 0, got ", kappa);
        detail::require(sigma_r >= 0.0, "sigma_r must be >= 0, got ", sigma_r);
        detail::require(sigma_b >= 0.0, "sigma_b must be >= 0, got ", sigma_b);
        detail::require(s >= 0.0, "quantization step must be >= 0, got ", s);
        detail::require(lambda_r > -0.5, "lambda_r must be > -0.5 for finite variance, got ",
                        lambda_r);
    }

    bool operator==(const NoiseParams&) const = default;
};

struct CameraProfile {
    Cfa cfa = Cfa::RGGB;
    double black_level = 0.0;
    double white_level = 65535.0;
    std::array<double, 3> wb_gains = {1.0, 1.0, 1.0};
    // Default camera space is linear sRGB.
    Matrix3 cam_to_xyz = kSrgbToXyz;
    NoiseParams noise;

    // Quantization step of one DN in normalized units.
    double quantization_step() const { return 1.0 / (white_level - black_level); }

    void validate() const {
        detail::require(black_level < white_level, "black_level (", black_level,
                        ") must be below white_level (", white_level, ")");
        for (double g : wb_gains) detail::require(g > 0.0, "white-balance gains must be > 0");
        detail::require(std::abs(determinant(cam_to_xyz)) > 1e-12, "cam_to_xyz is not invertible");
        noise.validate();
    }

    bool operator==(const CameraProfile&) const = default;
};

// Second row of cam_to_xyz * diag(wb_gains): per-channel weights giving Y.
inline std::array<double, 3> luminance_weights(const CameraProfile& profile) {
    return {profile.cam_to_xyz[1][0] * profile.wb_gains[0],
            profile.cam_to_xyz[1][1] * profile.wb_gains[1],
            profile.cam_to_xyz[1][2] * profile.wb_gains[2]};
}

// Same weights spread over the packed (R, G1, G2, B) planes with G = (G1+G2)/2.
inline std::array<double, 4> packed_luminance_weights(const CameraProfile& profile) {
    const auto w = luminance_weights(profile);
    return {w[0], 0.5 * w[1], 0.5 * w[1], w[2]};
}

} // namespace rawlume
