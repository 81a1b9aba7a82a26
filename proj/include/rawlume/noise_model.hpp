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

// Physics-based raw noise: synthesis, per-pixel variance prediction and
// calibration from dark and flat-field frames.
//
// The synthesized signal is
//   noisy = kappa * Poisson(clean / kappa) + read + band[row] + quant
// with read ~ Tukey-lambda(lambda_r) standardized to unit variance and scaled
// by sigma_r, band ~ N(0, sigma_b) drawn once per row and
// quant ~ U(-s/2, s/2). Output is never clipped.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>
#include <vector>

#include "rawlume/error.hpp"
#include "rawlume/image.hpp"
#include "rawlume/profile.hpp"
#include "rawlume/random.hpp"

namespace rawlume {

// Per-pixel noise variance, same geometry as the raw plane.
struct VarianceMap {
    Plane v;
};

// Tukey-lambda quantile Q(p; lambda) = (p^l - (1-p)^l) / l, ln(p/(1-p)) at l = 0.
inline double tukey_lambda_quantile(double p, double lambda) {
    detail::require(p > 0.0 && p < 1.0, "tukey_lambda_quantile: p must lie in (0,1), got ", p);
    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    if (lambda == 0.0) return lp - lq;
    // expm1 keeps the small-lambda branch continuous with the logistic limit.
    return (std::expm1(lambda * lp) - std::expm1(lambda * lq)) / lambda;
}

// Variance of the unit-scale Tukey-lambda distribution.
inline double tukey_lambda_variance(double lambda) {
    detail::require(lambda > -0.5, "Tukey-lambda variance is infinite for lambda <= -0.5");
    constexpr double kLogistic = std::numbers::pi * std::numbers::pi / 3.0;
    auto closed_form = [](double l) {
        const double ratio = std::exp(2.0 * std::lgamma(l + 1.0) - std::lgamma(2.0 * l + 2.0));
        return 2.0 / (l * l) * (1.0 / (1.0 + 2.0 * l) - ratio);
    };
    // The closed form cancels catastrophically near 0; bridge linearly.
    constexpr double kBridge = 1e-3;
    if (lambda == 0.0) return kLogistic;
    if (std::abs(lambda) < kBridge) {
        const double edge = std::copysign(kBridge, lambda);
        return kLogistic + (closed_form(edge) - kLogistic) * (lambda / edge);
    }
    return closed_form(lambda);
}

// Unit-variance Tukey-lambda variate by inversion.
inline double sample_standard_tukey(Rng& rng, double lambda) {
    return tukey_lambda_quantile(rng.uniform_open(), lambda) / std::sqrt(tukey_lambda_variance(lambda));
}

namespace detail {

inline void require_unit_range(const RawImage& clean, const char* op) {
    for (double v : clean.data.values()) {
        require(std::isfinite(v) && v >= 0.0 && v <= 1.0, op,
                ": clean values must lie in [0,1], got ", v);
    }
}

} // namespace detail

inline RawImage sample_noise(const RawImage& clean, const NoiseParams& params, Rng& rng) {
    params.validate();
    detail::require_unit_range(clean, "sample_noise");
    const double tl_scale =
        params.sigma_r > 0.0 ? params.sigma_r / std::sqrt(tukey_lambda_variance(params.lambda_r)) : 0.0;
    RawImage out = clean;
    for (int y = 0; y < clean.height(); ++y) {
        const double band = params.sigma_b > 0.0 ? params.sigma_b * rng.normal() : 0.0;
        auto row = out.data.row(y);
        for (double& v : row) {
            double signal = v;
            if (params.kappa > 0.0) signal = params.kappa * rng.poisson(v / params.kappa);
            double read = 0.0;
            if (tl_scale > 0.0) read = tl_scale * tukey_lambda_quantile(rng.uniform_open(), params.lambda_r);
            double quant = 0.0;
            if (params.s > 0.0) quant = params.s * (rng.uniform() - 0.5);
            v = signal + read + band + quant;
        }
    }
    return out;
}

// V = kappa * clean + sigma_r^2 + sigma_b^2 + s^2 / 12.
inline VarianceMap variance_map(const RawImage& clean, const NoiseParams& params) {
    params.validate();
    detail::require_unit_range(clean, "variance_map");
    const double floor = params.sigma_r * params.sigma_r + params.sigma_b * params.sigma_b +
                         params.s * params.s / 12.0;
    VarianceMap out{Plane(clean.width(), clean.height())};
    auto src = clean.data.values();
    auto dst = out.v.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = params.kappa * src[i] + floor;
    return out;
}

inline RawImage darken(const RawImage& clean, double factor) {
    detail::require(std::isfinite(factor) && factor >= 1.0, "darken factor must be >= 1, got ", factor);
    RawImage out = clean;
    for (double& v : out.data.values()) v /= factor;
    return out;
}

// Draws a darkening factor uniformly from [lo, hi].
inline double draw_darken_factor(Rng& rng, double lo, double hi) {
    detail::require(lo >= 1.0 && hi >= lo, "darken factor range must satisfy 1 <= lo <= hi");
    return lo == hi ? lo : rng.uniform(lo, hi);
}

// ---------------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------------

struct BandingEstimate {
    double sigma_b = 0.0;
    double row_mean_variance = 0.0;  // pooled variance of row means
    double within_row_variance = 0.0;
};

// Row-mean banding estimate from dark frames. The variance of row means is
// corrected for the read noise left in each mean (within-row variance / width).
inline BandingEstimate estimate_banding(const std::vector<RawImage>& darks) {
    detail::require(darks.size() >= 2, "need ≥ 2 dark frames, got ", darks.size());
    double row_ss = 0.0;
    long long row_dof = 0;
    double within_ss = 0.0;
    long long within_dof = 0;
    int width = 0;
    for (const auto& frame : darks) {
        detail::require(frame.height() >= 64, "dark frames need >= 64 rows, got ", frame.height());
        detail::require(width == 0 || frame.width() == width, "dark frames differ in width");
        width = frame.width();
        auto all = frame.data.values();
        const double frame_mean = std::accumulate(all.begin(), all.end(), 0.0) / all.size();
        for (int y = 0; y < frame.height(); ++y) {
            auto row = frame.data.row(y);
            const double m = std::accumulate(row.begin(), row.end(), 0.0) / row.size();
            row_ss += (m - frame_mean) * (m - frame_mean);
            for (double v : row) within_ss += (v - m) * (v - m);
            within_dof += static_cast<long long>(row.size()) - 1;
        }
        row_dof += frame.height() - 1;
    }
    BandingEstimate est;
    est.row_mean_variance = row_ss / row_dof;
    est.within_row_variance = within_dof > 0 ? within_ss / within_dof : 0.0;
    const double band_var = est.row_mean_variance - est.within_row_variance / width;
    est.sigma_b = std::sqrt(std::max(band_var, 0.0));
    return est;
}

struct PpccOptions {
    double lambda_min = -0.45;
    double lambda_max = 1.0;
    double lambda_step = 0.01;
    // Larger pools are thinned to this many evenly spaced order statistics.
    std::size_t max_points = 50000;
};

struct TukeyFit {
    double lambda_r = 0.0;
    double sigma_r = 0.0;
    double ppcc = 0.0;        // correlation at the selected shape
    std::size_t samples = 0;  // pooled pixel count
};

// Filliben order-statistic medians for sample size n, rank i in [0, n).
inline double filliben_position(std::size_t i, std::size_t n) {
    const double last = std::pow(0.5, 1.0 / static_cast<double>(n));
    if (i == 0) return 1.0 - last;
    if (i + 1 == n) return last;
    return (static_cast<double>(i + 1) - 0.3175) / (static_cast<double>(n) + 0.365);
}

// PPCC shape search over pre-pooled samples, then probability-plot scale.
inline TukeyFit fit_tukey_ppcc(std::vector<double> samples, const PpccOptions& opts = {}) {
    detail::require(samples.size() >= 3, "PPCC fit needs at least 3 samples");
    std::sort(samples.begin(), samples.end());
    detail::require(samples.back() > samples.front(), "PPCC fit: samples are constant");
    const std::size_t n = samples.size();
    const std::size_t m = std::min(n, std::max<std::size_t>(opts.max_points, 3));

    std::vector<double> x(m), pos(m);
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t rank = (m == n) ? k : static_cast<std::size_t>(std::llround(
                                                    static_cast<double>(k) * (n - 1) / (m - 1)));
        x[k] = samples[rank];
        pos[k] = filliben_position(rank, n);
    }
    const double x_mean = std::accumulate(x.begin(), x.end(), 0.0) / m;
    double sxx = 0.0;
    for (double& v : x) {
        v -= x_mean;
        sxx += v * v;
    }

    std::vector<double> q(m);
    auto correlate = [&](double lambda, double* slope) {
        double q_mean = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            q[k] = tukey_lambda_quantile(pos[k], lambda);
            q_mean += q[k];
        }
        q_mean /= m;
        double sqq = 0.0, sqx = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const double d = q[k] - q_mean;
            sqq += d * d;
            sqx += d * x[k];
        }
        if (slope) *slope = sqx / sqq;
        return sqx / std::sqrt(sqq * sxx);
    };

    TukeyFit fit;
    fit.samples = n;
    fit.ppcc = -2.0;
    const int steps = static_cast<int>(std::llround((opts.lambda_max - opts.lambda_min) / opts.lambda_step));
    for (int i = 0; i <= steps; ++i) {
        const double lambda = opts.lambda_min + i * opts.lambda_step;
        const double r = correlate(lambda, nullptr);
        if (r > fit.ppcc || (r == fit.ppcc && std::abs(lambda) < std::abs(fit.lambda_r))) {
            fit.ppcc = r;
            fit.lambda_r = lambda;
        }
    }
    double slope = 0.0;
    correlate(fit.lambda_r, &slope);
    fit.sigma_r = slope * std::sqrt(tukey_lambda_variance(fit.lambda_r));
    return fit;
}

// Read-noise shape and scale from dark frames after per-row mean removal.
inline TukeyFit estimate_tukey_ppcc(const std::vector<RawImage>& darks, const PpccOptions& opts = {}) {
    detail::require(!darks.empty(), "need >= 1 dark frame for the read-noise fit");
    std::vector<double> pooled;
    int width = darks.front().width();
    for (const auto& frame : darks) {
        detail::require(frame.width() == width, "dark frames differ in width");
        for (int y = 0; y < frame.height(); ++y) {
            auto row = frame.data.row(y);
            const double m = std::accumulate(row.begin(), row.end(), 0.0) / row.size();
            for (double v : row) pooled.push_back(v - m);
        }
    }
    detail::require(pooled.size() >= 10000, "read-noise fit needs >= 10^4 pooled pixels, got ",
                    pooled.size());
    TukeyFit fit = fit_tukey_ppcc(std::move(pooled), opts);
    // Subtracting the row mean shrinks the variance by (W-1)/W.
    fit.sigma_r *= std::sqrt(static_cast<double>(width) / (width - 1));
    return fit;
}

struct GainFit {
    double kappa = 0.0;      // slope of variance vs mean
    double intercept = 0.0;  // signal-independent variance
    double r_squared = 0.0;
    std::vector<std::pair<double, double>> points;  // (mean, variance) per patch
};

// Photon transfer: for every full patch of every flat pair, mean of both
// patches vs half the variance of their difference; kappa is the LSQ slope.
// Patches touching a saturated (>= 1) sample are skipped.
inline GainFit estimate_gain_photon_transfer(const std::vector<std::pair<RawImage, RawImage>>& pairs,
                                             int patch = 32) {
    detail::require(patch >= 2, "patch size must be >= 2");
    GainFit fit;
    for (const auto& [a, b] : pairs) {
        detail::require(a.data.same_shape(b.data), "flat pair frames differ in geometry");
        for (int py = 0; py + patch <= a.height(); py += patch) {
            for (int px = 0; px + patch <= a.width(); px += patch) {
                double sum = 0.0, dsum = 0.0, dss = 0.0;
                bool saturated = false;
                for (int y = py; y < py + patch; ++y) {
                    for (int x = px; x < px + patch; ++x) {
                        const double va = a.data(x, y);
                        const double vb = b.data(x, y);
                        saturated |= (va >= 1.0 || vb >= 1.0);
                        sum += va + vb;
                        const double d = va - vb;
                        dsum += d;
                        dss += d * d;
                    }
                }
                if (saturated) continue;
                const double count = static_cast<double>(patch) * patch;
                const double mean = sum / (2.0 * count);
                const double dvar = (dss - dsum * dsum / count) / (count - 1.0);
                fit.points.emplace_back(mean, 0.5 * dvar);
            }
        }
    }
    detail::require(fit.points.size() >= 3, "photon transfer needs >= 3 usable (mean, variance) points, got ",
                    fit.points.size());
    const double n = static_cast<double>(fit.points.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : fit.points) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [x, y] : fit.points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    detail::require(sxx > 0.0, "photon transfer: all patches share one signal level");
    fit.kappa = sxy / sxx;
    fit.intercept = my - fit.kappa * mx;
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

} // namespace rawlume
