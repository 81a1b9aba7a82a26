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

// Global polynomial color transform J_out = A * rho_K(J_in) on encoded sRGB.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "rawlume/error.hpp"
#include "rawlume/image.hpp"
#include "rawlume/raw_core.hpp"

namespace rawlume {

struct PolySpec {
    int degree = 3;
    bool with_constant = true;

    void validate() const {
        detail::require(degree >= 1 && degree <= 4, "degree ∈ 1..4 (got ", degree, ")");
    }

    // C(K+3, 3) with the constant, one fewer without.
    int term_count() const {
        validate();
        const int full = (degree + 3) * (degree + 2) * (degree + 1) / 6;
        return with_constant ? full : full - 1;
    }

    bool operator==(const PolySpec&) const = default;
};

namespace detail {

using Exponents = std::array<int, 3>;  // powers of (r, g, b)

// Terms that enter at each degree, highest degree first in the expansion.
inline const std::vector<Exponents>& degree_terms(int degree) {
    static const std::array<std::vector<Exponents>, 5> table = {{
        {{0, 0, 0}},
        {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}},
        {{2, 0, 0}, {0, 2, 0}, {0, 0, 2}, {1, 1, 0}, {0, 1, 1}, {1, 0, 1}},
        {{3, 0, 0}, {0, 3, 0}, {0, 0, 3},
         {1, 2, 0}, {0, 1, 2}, {1, 0, 2},   // r g^2, g b^2, r b^2
         {2, 1, 0}, {0, 2, 1}, {2, 0, 1},   // g r^2, b g^2, b r^2
         {1, 1, 1}},
        {{4, 0, 0}, {0, 4, 0}, {0, 0, 4},
         {3, 1, 0}, {3, 0, 1}, {1, 3, 0}, {0, 3, 1}, {1, 0, 3}, {0, 1, 3},
         {2, 2, 0}, {0, 2, 2}, {2, 0, 2},
         {2, 1, 1}, {1, 2, 1}, {1, 1, 2}},
    }};
    return table[degree];
}

} // namespace detail

// Monomial exponents in expansion order: degree K terms first, down to the
// linear terms, then the constant when present.
inline std::vector<detail::Exponents> poly_terms(const PolySpec& spec) {
    spec.validate();
    std::vector<detail::Exponents> terms;
    for (int d = spec.degree; d >= 1; --d) {
        const auto& t = detail::degree_terms(d);
        terms.insert(terms.end(), t.begin(), t.end());
    }
    if (spec.with_constant) terms.push_back({0, 0, 0});
    return terms;
}

inline void poly_expand(double r, double g, double b, std::span<const detail::Exponents> terms,
                        std::span<double> out) {
    std::array<std::array<double, 5>, 3> pw{};
    for (int c = 0; c < 3; ++c) {
        const double v = c == 0 ? r : (c == 1 ? g : b);
        pw[c][0] = 1.0;
        for (int e = 1; e < 5; ++e) pw[c][e] = pw[c][e - 1] * v;
    }
    for (std::size_t t = 0; t < terms.size(); ++t)
        out[t] = pw[0][terms[t][0]] * pw[1][terms[t][1]] * pw[2][terms[t][2]];
}

inline std::vector<double> poly_expand(double r, double g, double b, const PolySpec& spec) {
    const auto terms = poly_terms(spec);
    std::vector<double> out(terms.size());
    poly_expand(r, g, b, terms, out);
    return out;
}

// 3 x term_count coefficients, row-major.
struct ColorMatrix {
    PolySpec spec;
    std::vector<double> rows;

    double& operator()(int row, int term) { return rows[static_cast<std::size_t>(row) * spec.term_count() + term]; }
    double operator()(int row, int term) const {
        return rows[static_cast<std::size_t>(row) * spec.term_count() + term];
    }

    void validate() const {
        detail::require(rows.size() == static_cast<std::size_t>(3 * spec.term_count()),
                        "color matrix has ", rows.size(), " entries, expected 3 x ", spec.term_count());
        for (double v : rows) detail::require(std::isfinite(v), "color matrix entries must be finite");
    }

    static ColorMatrix zeros(const PolySpec& spec) {
        return {spec, std::vector<double>(static_cast<std::size_t>(3 * spec.term_count()), 0.0)};
    }

    // Rows that pick r, g and b out of the expansion.
    static ColorMatrix identity(const PolySpec& spec) {
        ColorMatrix m = zeros(spec);
        const auto terms = poly_terms(spec);
        for (int c = 0; c < 3; ++c) {
            detail::Exponents want{0, 0, 0};
            want[c] = 1;
            const auto it = std::find(terms.begin(), terms.end(), want);
            m(c, static_cast<int>(it - terms.begin())) = 1.0;
        }
        return m;
    }
};

// Per pixel A * rho(rgb) clamped to [0,1]; clamp=false exposes the raw product.
inline RgbImage apply_color(const RgbImage& img, const ColorMatrix& a, bool clamp = true) {
    detail::require_state(img, ColorState::EncodedSrgb, "apply_color");
    a.validate();
    const auto terms = poly_terms(a.spec);
    const int t = static_cast<int>(terms.size());
    RgbImage out(img.width(), img.height(), ColorState::EncodedSrgb);
    std::vector<double> rho(t);
    const std::size_t n = img[0].size();
    for (std::size_t i = 0; i < n; ++i) {
        poly_expand(img[0].values()[i], img[1].values()[i], img[2].values()[i], terms, rho);
        for (int c = 0; c < 3; ++c) {
            double acc = 0.0;
            for (int k = 0; k < t; ++k) acc += a(c, k) * rho[k];
            out[c].values()[i] = clamp ? std::clamp(acc, 0.0, 1.0) : acc;
        }
    }
    return out;
}

struct ColorFit {
    ColorMatrix matrix;
    double residual = 0.0;  // sum over pixels of |A rho(source) - target|^2
};

inline constexpr double kColorFitDamping = 1e-8;
inline constexpr double kColorRankTolerance = 1e-13;

// Least squares via the damped normal equations (G + 1e-8 I) A^T = sum rho t^T.
inline ColorFit fit_color_lsq(const RgbImage& source, const RgbImage& target, const PolySpec& spec) {
    detail::require(source.rgb.same_shape(target.rgb), "fit_color_lsq: source and target geometry differ");
    const auto terms = poly_terms(spec);
    const int t = static_cast<int>(terms.size());
    const std::size_t n = source[0].size();
    detail::require(n >= static_cast<std::size_t>(t), "fit_color_lsq: need >= ", t, " pixels, got ", n);

    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(t, t);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(t, 3);
    Eigen::VectorXd rho(t);
    for (std::size_t i = 0; i < n; ++i) {
        poly_expand(source[0].values()[i], source[1].values()[i], source[2].values()[i], terms,
                    std::span<double>(rho.data(), t));
        gram.selfadjointView<Eigen::Lower>().rankUpdate(rho);
        for (int c = 0; c < 3; ++c) rhs.col(c) += target[c].values()[i] * rho;
    }
    gram = gram.selfadjointView<Eigen::Lower>();

    // The damping only guards round-off; a Gram matrix that is numerically
    // singular before damping means the colors cannot determine the terms.
    const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram, Eigen::EigenvaluesOnly).eigenvalues();
    const double ratio = eig.maxCoeff() > 0.0 ? eig.minCoeff() / eig.maxCoeff() : 0.0;
    detail::require(ratio > kColorRankTolerance, "fit_color_lsq: Gram matrix is rank deficient (eigenvalue ratio ",
                    ratio, "); the source has too few distinct colors for ", t, " terms");
    gram.diagonal().array() += kColorFitDamping;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    detail::require(llt.info() == Eigen::Success, "fit_color_lsq: damped Gram matrix is not positive definite");
    const Eigen::MatrixXd solution = llt.solve(rhs);  // t x 3

    ColorFit fit{ColorMatrix::zeros(spec), 0.0};
    for (int c = 0; c < 3; ++c)
        for (int k = 0; k < t; ++k) fit.matrix(c, k) = solution(k, c);

    for (std::size_t i = 0; i < n; ++i) {
        poly_expand(source[0].values()[i], source[1].values()[i], source[2].values()[i], terms,
                    std::span<double>(rho.data(), t));
        for (int c = 0; c < 3; ++c) {
            const double d = solution.col(c).dot(rho) - target[c].values()[i];
            fit.residual += d * d;
        }
    }
    return fit;
}

} // namespace rawlume
