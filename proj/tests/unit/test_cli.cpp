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

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace rawlume;
using namespace rawlume::testing;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code = -1;
    std::string out;
};

CliRun run_cli(const TempDir& dir, const std::string& args) {
    const fs::path log = dir / "cli.log";
    const std::string cmd = std::string("\"") + RAWLUME_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    r.out = ss.str();
    return r;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

const NoiseParams kNoise{0.002, 0.2, 0.015, 0.010, 0.0};

CameraProfile bundle_profile(bool with_noise) {
    CameraProfile p;
    p.black_level = 1024;
    p.white_level = 16383;
    if (with_noise) {
        p.noise = kNoise;
        p.noise.s = p.quantization_step();
    }
    return p;
}

// Writes a raw frame plus its sidecar profile.
void write_frame(const fs::path& path, const RawImage& raw, const CameraProfile& profile) {
    save_raw(path, raw, profile);
    write_profile(sidecar_path(path), profile);
}

void write_bundle(const TempDir& dir) {
    const CameraProfile profile = bundle_profile(true);
    fs::create_directories(dir / "dark");
    fs::create_directories(dir / "flat");
    Rng rng(17);
    const RawImage black(Plane(256, 128), Cfa::RGGB);
    for (int i = 0; i < 4; ++i)
        save_raw(dir / ("dark/d" + std::to_string(i) + ".raw"), sample_noise(black, kNoise, rng), profile);
    for (int i = 0; i < 8; ++i) {
        const RawImage flat(Plane(128, 128, 0.05 + 0.1 * i), Cfa::RGGB);
        for (int k = 0; k < 2; ++k)
            save_raw(dir / ("flat/f" + std::to_string(i) + std::to_string(k) + ".raw"),
                     sample_noise(flat, kNoise, rng), profile);
    }
    write_profile(dir / "profile.json", bundle_profile(false), json{{"camera", "bench"}});
}

} // namespace

TEST(Cli, CalibrateWritesNoiseAndIsRepeatable) {
    TempDir dir("cli");
    write_bundle(dir);
    const std::string base = "calibrate --dark-dir " + q(dir / "dark") + " --flat-dir " + q(dir / "flat") +
                             " --profile " + q(dir / "profile.json");
    const CliRun first = run_cli(dir, base + " --out " + q(dir / "a.json"));
    ASSERT_EQ(first.code, 0) << first.out;
    EXPECT_NE(first.out.find("kappa"), std::string::npos);
    EXPECT_NE(first.out.find("PPCC peak"), std::string::npos);
    const CliRun second = run_cli(dir, base + " --out " + q(dir / "b.json"));
    ASSERT_EQ(second.code, 0) << second.out;
    EXPECT_EQ(slurp(dir / "a.json"), slurp(dir / "b.json"));

    const json j = detail::read_json(dir / "a.json");
    EXPECT_EQ(j.at("camera"), "bench");
    const CameraProfile p = read_profile(dir / "a.json");
    EXPECT_NEAR(p.noise.kappa / 0.002, 1.0, 0.10);
    EXPECT_NEAR(p.noise.lambda_r, 0.2, 0.08);
    EXPECT_NEAR(p.noise.sigma_r / 0.015, 1.0, 0.15);
    EXPECT_NEAR(p.noise.s, 1.0 / 15359.0, 1e-15);
}

TEST(Cli, CalibrateNeedsTwoDarkFrames) {
    TempDir dir("cli");
    write_bundle(dir);
    fs::create_directories(dir / "empty");
    const CliRun r = run_cli(dir, "calibrate --dark-dir " + q(dir / "empty") + " --flat-dir " + q(dir / "flat") +
                                   " --profile " + q(dir / "profile.json"));
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("need ≥ 2 dark frames"), std::string::npos) << r.out;
}

TEST(Cli, SynthUnitFactorWithoutNoiseReproducesInput) {
    TempDir dir("cli");
    CameraProfile profile = bundle_profile(false);
    profile.noise = NoiseParams{};
    write_frame(dir / "clean.raw", scene_raw(32, 24), profile);
    const CliRun r = run_cli(dir, "synth --clean " + q(dir / "clean.raw") + " --factor-range 1:1 --seed 3 --out-pair " +
                                   q(dir / "n.raw") + " " + q(dir / "c.raw"));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(read_raw_container(dir / "n.raw").samples, read_raw_container(dir / "clean.raw").samples);
    const json side = detail::read_json(dir / "n.json");
    EXPECT_EQ(side.at("synth").at("role"), "noisy");
    EXPECT_EQ(side.at("synth").at("seed"), 3);
    EXPECT_EQ(side.at("synth").at("factor"), 1.0);
}

TEST(Cli, SynthSameSeedIsBitIdentical) {
    TempDir dir("cli");
    write_frame(dir / "clean.raw", scene_raw(32, 24), bundle_profile(true));
    auto synth = [&](const std::string& tag, int seed) {
        return run_cli(dir, "synth --clean " + q(dir / "clean.raw") + " --factor-range 2:8 --seed " +
                                std::to_string(seed) + " --out-pair " + q(dir / (tag + "n.raw")) + " " +
                                q(dir / (tag + "c.raw")));
    };
    ASSERT_EQ(synth("a", 5).code, 0);
    ASSERT_EQ(synth("b", 5).code, 0);
    ASSERT_EQ(synth("c", 6).code, 0);
    EXPECT_EQ(slurp(dir / "an.raw"), slurp(dir / "bn.raw"));
    EXPECT_EQ(slurp(dir / "ac.raw"), slurp(dir / "bc.raw"));
    EXPECT_NE(slurp(dir / "an.raw"), slurp(dir / "cn.raw"));
}

TEST(Cli, SynthWithoutNoiseParametersFails) {
    TempDir dir("cli");
    const CameraProfile profile = bundle_profile(false);
    save_raw(dir / "clean.raw", scene_raw(16, 16), profile);
    detail::write_json(dir / "clean.json", json{{"white_level", 16383}, {"black_level", 1024}});
    const CliRun r = run_cli(dir, "synth --clean " + q(dir / "clean.raw") + " --out-pair " + q(dir / "n.raw") + " " +
                                   q(dir / "c.raw"));
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("profile has no noise parameters"), std::string::npos) << r.out;
}

TEST(Cli, EnhanceWritesDeterministicOutput) {
    TempDir dir("cli");
    write_frame(dir / "in.raw", darken(scene_raw(48, 32), 6.0), bundle_profile(true));
    const std::string base = "enhance --input " + q(dir / "in.raw") + " --steps 40";
    const CliRun a = run_cli(dir, base + " --out " + q(dir / "a.ppm") + " --grids-out " + q(dir / "g.json"));
    ASSERT_EQ(a.code, 0) << a.out;
    EXPECT_NE(a.out.find("exposure loss"), std::string::npos);
    EXPECT_NE(a.out.find("joint"), std::string::npos);
    ASSERT_EQ(run_cli(dir, base + " --out " + q(dir / "b.ppm")).code, 0);
    EXPECT_EQ(slurp(dir / "a.ppm"), slurp(dir / "b.ppm"));
    const RgbImage img = read_ppm(dir / "a.ppm");
    EXPECT_EQ(img.width(), 48);
    EXPECT_EQ(img.height(), 32);
    EXPECT_EQ(grids_from_json(detail::read_json(dir / "g.json")).size(), 9u);

    const CliRun rgb16 = run_cli(dir, base + " --out " + q(dir / "a.rgb16"));
    ASSERT_EQ(rgb16.code, 0) << rgb16.out;
    EXPECT_EQ(fs::file_size(dir / "a.rgb16"), 48u * 32u * 6u);
}

TEST(Cli, EnhanceSwitchesAndReusedGrids) {
    TempDir dir("cli");
    write_frame(dir / "in.raw", darken(scene_raw(32, 32), 6.0), bundle_profile(true));
    const std::string base = "enhance --input " + q(dir / "in.raw") + " --steps 40";
    ASSERT_EQ(run_cli(dir, base + " --out " + q(dir / "full.ppm") + " --grids-out " + q(dir / "g.json")).code, 0);

    const CliRun plain = run_cli(dir, base + " --no-denoise --no-color --grids-in " + q(dir / "g.json") + " --out " +
                                       q(dir / "plain.ppm"));
    ASSERT_EQ(plain.code, 0) << plain.out;
    EXPECT_EQ(plain.out.find("joint"), std::string::npos);
    EXPECT_EQ(plain.out.find("color"), std::string::npos);
    EXPECT_NE(plain.out.find("enhance"), std::string::npos);
    EXPECT_NE(slurp(dir / "full.ppm"), slurp(dir / "plain.ppm"));

    // Reused grids reproduce the fitted run exactly.
    ASSERT_EQ(run_cli(dir, base + " --grids-in " + q(dir / "g.json") + " --out " + q(dir / "again.ppm")).code, 0);
    EXPECT_EQ(slurp(dir / "full.ppm"), slurp(dir / "again.ppm"));
}

TEST(Cli, EnhanceRejectsMissingInput) {
    TempDir dir("cli");
    const CliRun r = run_cli(dir, "enhance --input " + q(dir / "nope.raw") + " --out " + q(dir / "x.ppm"));
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("error: "), std::string::npos);
}

TEST(Cli, FitColorRoundTripAndDegreeCheck) {
    TempDir dir("cli");
    Rng rng(23);
    const RgbImage src = random_rgb(rng, 32, 32, ColorState::EncodedSrgb);
    write_ppm(dir / "src.ppm", src);
    const CliRun ok = run_cli(dir, "fit-color --source " + q(dir / "src.ppm") + " --target " + q(dir / "src.ppm") +
                                    " --degree 1 --constant --out " + q(dir / "m.json"));
    ASSERT_EQ(ok.code, 0) << ok.out;
    const ColorMatrix m = color_matrix_from_json(detail::read_json(dir / "m.json"));
    EXPECT_EQ(m.spec, (PolySpec{1, true}));
    const ColorMatrix id = ColorMatrix::identity(m.spec);
    for (std::size_t i = 0; i < id.rows.size(); ++i) EXPECT_NEAR(m.rows[i], id.rows[i], 1e-6);

    const CliRun bad = run_cli(dir, "fit-color --source " + q(dir / "src.ppm") + " --target " + q(dir / "src.ppm") +
                                     " --degree 5 --out " + q(dir / "m5.json"));
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.out.find("degree ∈ 1..4"), std::string::npos) << bad.out;
}

TEST(Cli, MetricsPrintsJsonLine) {
    TempDir dir("cli");
    Rng rng(29);
    write_ppm(dir / "a.ppm", random_rgb(rng, 16, 16, ColorState::EncodedSrgb));
    const CliRun same = run_cli(dir, "metrics --a " + q(dir / "a.ppm") + " --b " + q(dir / "a.ppm"));
    ASSERT_EQ(same.code, 0) << same.out;
    const json j = json::parse(same.out);
    EXPECT_EQ(j.at("psnr"), 100.0);
    EXPECT_NEAR(j.at("ssim").get<double>(), 1.0, 1e-12);
    EXPECT_GT(j.at("entropy").get<double>(), 0.0);

    const CliRun single = run_cli(dir, "metrics --a " + q(dir / "a.ppm"));
    ASSERT_EQ(single.code, 0);
    const json s = json::parse(single.out);
    EXPECT_TRUE(s.at("psnr").is_null());
    EXPECT_TRUE(s.at("ssim").is_null());
    EXPECT_EQ(s.at("entropy"), j.at("entropy"));
}

TEST(Cli, UnknownSubcommandFails) {
    TempDir dir("cli");
    EXPECT_NE(run_cli(dir, "bogus").code, 0);
    EXPECT_NE(run_cli(dir, "").code, 0);
}
