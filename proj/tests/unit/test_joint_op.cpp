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

#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace rawlume;
using namespace rawlume::testing;

namespace {

NoiseParams planted_params() { return {0.002, 0.2, 0.015, 0.010, 1.0 / 16383.0}; }

PackedImage noisy_flat(double level, double sigma, int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    PackedImage img(w, h);
    for (auto& p : img.planes)
        for (double& v : p.values()) v = level + sigma * rng.normal();
    return img;
}

double packed_variance(const PackedImage& img) {
    double s = 0.0;
    for (const auto& p : img.planes) s += variance_of(p.values());
    return s / 4.0;
}

double packed_psnr(const PackedImage& a, const PackedImage& b) { return psnr(a, b); }

} // namespace

TEST(Denoise, ZeroVarianceIsIdentity) {
    Rng rng(1);
    const PackedImage img = random_image<4>(rng, 12, 9);
    EXPECT_EQ(denoise_variance_guided(img, PackedImage(12, 9), Plane(12, 9, 1.0)), img);
    // Zero gain bypasses as well.
    EXPECT_EQ(denoise_variance_guided(img, PackedImage(12, 9, 0.01), Plane(12, 9, 0.0)), img);
}

TEST(Denoise, ConstantImageUnchanged) {
    Rng rng(2);
    const PackedImage img(10, 10, 0.3);
    MultiPlane<4> var;
    for (auto& p : var.planes) p = random_plane(rng, 10, 10, 0.0, 0.05);
    const PackedImage out = denoise_variance_guided(img, var, random_plane(rng, 10, 10, 1.0, 5.0));
    EXPECT_LT(max_abs_diff(out, img), 1e-15);
}

TEST(Denoise, HalvesVarianceOfFlatNoisyPatch) {
    const double sigma = 0.02;
    const PackedImage img = noisy_flat(0.3, sigma, 128, 128, 3);
    const PackedImage out = denoise_variance_guided(img, PackedImage(128, 128, sigma * sigma), Plane(128, 128, 1.0));
    EXPECT_LT(packed_variance(out), 0.5 * packed_variance(img));
    EXPECT_NEAR(mean_of(out[0].values()), 0.3, 1e-3);
}

TEST(Denoise, OutputStaysWithinLocalWindowRange) {
    Rng rng(4);
    const PackedImage img = random_image<4>(rng, 15, 11);
    const DenoiseConfig cfg;
    const PackedImage out = denoise_variance_guided(img, PackedImage(15, 11, 0.04), Plane(15, 11, 2.0), cfg);
    for (int c = 0; c < 4; ++c)
        for (int y = 0; y < 11; ++y)
            for (int x = 0; x < 15; ++x) {
                double lo = 1e300, hi = -1e300;
                for (int dy = -cfg.radius; dy <= cfg.radius; ++dy)
                    for (int dx = -cfg.radius; dx <= cfg.radius; ++dx) {
                        lo = std::min(lo, img[c].clamped(x + dx, y + dy));
                        hi = std::max(hi, img[c].clamped(x + dx, y + dy));
                    }
                EXPECT_GE(out[c](x, y), lo - 1e-15);
                EXPECT_LE(out[c](x, y), hi + 1e-15);
            }
}

TEST(Denoise, PreservesStrongEdges) {
    const double sigma = 0.01, h = 0.3;  // h = 15 sigma, 7.5 range sigmas
    PackedImage img(32, 16);
    for (auto& p : img.planes)
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 32; ++x) p(x, y) = x < 16 ? 0.2 : 0.2 + h;
    const PackedImage out = denoise_variance_guided(img, PackedImage(32, 16, sigma * sigma), Plane(32, 16, 1.0));
    for (int c = 0; c < 4; ++c)
        for (int y = 0; y < 16; ++y) EXPECT_GE(out[c](16, y) - out[c](15, y), 0.9 * h);
}

TEST(Denoise, RejectsNegativeVarianceAndGeometryMismatch) {
    const PackedImage img(6, 6, 0.2);
    PackedImage var(6, 6, 0.01);
    var[2](3, 3) = -1e-9;
    EXPECT_THROW(denoise_variance_guided(img, var, Plane(6, 6, 1.0)), Error);
    EXPECT_THROW(denoise_variance_guided(img, PackedImage(6, 5), Plane(6, 6, 1.0)), Error);
    EXPECT_THROW(denoise_variance_guided(img, PackedImage(6, 6), Plane(5, 6, 1.0)), Error);
}

TEST(JointInit, ZeroNoiseKeepsPackedInputExactly) {
    Rng rng(5);
    const RawImage raw(random_plane(rng, 16, 12), Cfa::GBRG);
    const VarianceMap v = variance_map(raw, NoiseParams{});
    const JointState s = joint_init(raw, v);
    EXPECT_EQ(s.base, pack_cfa(raw));
    EXPECT_EQ(s.current, s.base);
    for (double a : s.amplification.values()) EXPECT_EQ(a, 1.0);
    EXPECT_EQ(s.iteration, 0);
}

TEST(JointInit, ConstantInputStaysConstant) {
    const RawImage raw(Plane(16, 16, 0.25), Cfa::RGGB);
    const JointState s = joint_init(raw, variance_map(raw, planted_params()));
    for (const auto& p : s.base.planes)
        for (double v : p.values()) EXPECT_NEAR(v, 0.25, 1e-15);
}

TEST(JointInit, ReducesNoiseOnPlantedFlatField) {
    const NoiseParams p = planted_params();
    const RawImage clean(Plane(128, 128, 0.05), Cfa::RGGB);
    Rng rng(6);
    const RawImage noisy = sample_noise(clean, p, rng);
    const JointState s = joint_init(noisy, variance_map(clean, p));
    const PackedImage truth = pack_cfa(clean);
    EXPECT_GT(packed_psnr(s.base, truth), packed_psnr(pack_cfa(noisy), truth));
}

TEST(JointInit, GeometryMismatchRejected) {
    const RawImage raw(Plane(8, 8, 0.1), Cfa::RGGB);
    EXPECT_THROW(joint_init(raw, VarianceMap{Plane(8, 6)}), Error);
}

TEST(JointStep, ZeroVarianceEqualsEnhanceStep) {
    Rng rng(7);
    const CameraProfile profile;
    const PackedImage img = random_image<4>(rng, 10, 8, 0.0, 0.6);
    const PackedImage zero_var(10, 8);
    const JointState s0 = joint_init(img, zero_var);
    const Plane theta = random_plane(rng, 10, 8, -0.5, 1.5);
    const JointState s1 = joint_step(s0, theta, zero_var, profile);
    const auto ref = enhance_step(img, theta, luminance_xyz(img, profile));
    EXPECT_EQ(s1.current, ref.next);
    EXPECT_EQ(s1.iteration, 1);
    EXPECT_EQ(s1.base, s0.base);
}

TEST(JointStep, ZeroThetaZeroVarianceLeavesStateUnchanged) {
    Rng rng(8);
    const PackedImage img = random_image<4>(rng, 6, 6);
    const JointState s0 = joint_init(img, PackedImage(6, 6));
    const JointState s1 = joint_step(s0, Plane(6, 6), PackedImage(6, 6), CameraProfile{});
    EXPECT_EQ(s1.current, s0.current);
    EXPECT_EQ(s1.amplification, s0.amplification);
}

TEST(JointStep, UnitThetaOnBlackDoublesAmplification) {
    const PackedImage black(6, 6);
    JointState s = joint_init(black, PackedImage(6, 6));
    for (int n = 1; n <= 3; ++n) {
        s = joint_step(s, Plane(6, 6, 1.0), PackedImage(6, 6), CameraProfile{});
        for (double a : s.amplification.values()) EXPECT_EQ(a, std::pow(2.0, n));
    }
}

TEST(JointStep, GeometryMismatchRejected) {
    const JointState s = joint_init(PackedImage(6, 6, 0.1), PackedImage(6, 6));
    EXPECT_THROW(joint_step(s, Plane(6, 5), PackedImage(6, 6), CameraProfile{}), Error);
    EXPECT_THROW(joint_step(s, Plane(6, 6), PackedImage(5, 6), CameraProfile{}), Error);
}

// A_n recomputed from scratch along a run with noise on.
TEST(JointStep, AmplificationRecursionHoldsAtEveryStep) {
    Rng rng(9);
    CameraProfile profile;
    profile.noise = planted_params();
    const PackedImage img = random_image<4>(rng, 12, 12, 0.0, 0.2);
    PackedImage var(12, 12, 4e-4);
    JointState s = joint_init(img, var);
    Plane expected(12, 12, 1.0);
    const SlicingPlan plan(make_guidance(s.base, profile));
    const GridSet grids = random_grids(rng, 5, 0.0, 1.0);
    for (const auto& g : grids) {
        const Plane theta = plan.slice(g);
        const Plane l = luminance_xyz(s.current, profile);
        for (std::size_t i = 0; i < expected.size(); ++i)
            expected.values()[i] *= 1.0 + theta.values()[i] * (1.0 - l.values()[i]);
        s = joint_step(s, theta, var, profile);
        EXPECT_LT(max_abs_diff(s.amplification, expected), 1e-12);
        for (double a : s.amplification.values()) EXPECT_GE(a, 1.0);
    }
}

TEST(JointRun, ZeroNoiseMatchesEnhanceProgressive) {
    Rng rng(10);
    const CameraProfile profile;  // zero noise parameters
    const RawImage raw(random_plane(rng, 24, 20, 0.0, 0.4), Cfa::BGGR);
    const GridSet grids = random_grids(rng, 9, -0.2, 1.0);
    const PackedImage joint = joint_run(raw, grids, profile);
    const PackedImage packed = pack_cfa(raw);
    const auto trace = enhance_progressive(packed, grids, make_guidance(packed, profile), profile);
    EXPECT_LT(max_abs_diff(joint, clamp_output(trace.images.back())), 1e-9);
}

TEST(JointRun, EmptyGridSetRejected) {
    const RawImage raw(Plane(8, 8, 0.1), Cfa::RGGB);
    EXPECT_THROW(joint_run(raw, GridSet{}, CameraProfile{}), Error);
}

TEST(JointRun, BeatsNoDenoiseOnPlantedNoiseScenes) {
    CameraProfile profile;
    profile.noise = planted_params();
    const GridSet grids(9, BilateralGrid(0.35));
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const RawImage clean = darken(scene_raw(128, 96, Cfa::RGGB, 0.3 * seed), 8.0);
        Rng rng(seed);
        const RawImage noisy = sample_noise(clean, profile.noise, rng);
        const PackedImage clean_packed = pack_cfa(clean);
        const PackedImage reference = clamp_output(
            enhance_progressive(clean_packed, grids, make_guidance(clean_packed, profile), profile).images.back());
        const PackedImage joint = joint_run(noisy, grids, profile);
        const PackedImage noisy_packed = pack_cfa(noisy);
        const PackedImage plain = clamp_output(
            enhance_progressive(noisy_packed, grids, make_guidance(noisy_packed, profile), profile).images.back());
        EXPECT_GT(packed_psnr(joint, reference), packed_psnr(plain, reference)) << "seed " << seed;
    }
}

TEST(JointRun, NoiseGrowsSlowerThanAmplification) {
    CameraProfile profile;
    profile.noise = planted_params();
    const GridSet grids(9, BilateralGrid(0.35));
    const RawImage clean = darken(RawImage(Plane(128, 128, 0.4), Cfa::RGGB), 8.0);
    Rng rng(12);
    const RawImage noisy = sample_noise(clean, profile.noise, rng);
    const double input_std = std::sqrt(packed_variance(pack_cfa(noisy)));

    const VarianceMap v = variance_map(clean, profile.noise);
    const PackedImage packed_var = pack_cfa(v.v, noisy.cfa);
    JointState s = joint_init(noisy, v);
    const SlicingPlan plan(make_guidance(s.base, profile));
    for (const auto& g : grids) s = joint_step(s, plan.slice(g), packed_var, profile);
    const double predicted = mean_of(s.amplification.values()) * input_std;
    const double measured = std::sqrt(packed_variance(s.current));
    EXPECT_LT(measured, 0.5 * predicted);
}
