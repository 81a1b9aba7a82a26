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

// rawlume command-line tool: calibrate, synth, enhance, fit-color, metrics.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "rawlume.hpp"

namespace fs = std::filesystem;
using namespace rawlume;

namespace {

struct Profiled {
    CameraProfile profile;
    json document;  // as read, so extra keys survive a rewrite
};

Profiled load_profile(const std::string& explicit_path, const fs::path& data_path) {
    const fs::path path = explicit_path.empty() ? sidecar_path(data_path) : fs::path(explicit_path);
    detail::require(fs::exists(path), "no camera profile: '", path.string(), "' does not exist");
    Profiled p;
    p.document = detail::read_json(path);
    p.profile = profile_from_json(p.document);
    return p;
}

std::vector<fs::path> raw_files(const std::string& dir) {
    std::vector<fs::path> files;
    if (!fs::is_directory(dir)) return files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".raw") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    return files;
}

std::pair<double, double> parse_range(const std::string& text) {
    const auto colon = text.find(':');
    detail::require(colon != std::string::npos, "factor range must look like lo:hi, got '", text, "'");
    try {
        return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
    } catch (const std::exception&) {
        detail::fail("factor range must look like lo:hi, got '", text, "'");
    }
}

RgbImage read_image(const std::string& path) {
    const fs::path p(path);
    if (p.extension() == ".raw") {
        const CameraProfile profile = load_profile("", p).profile;
        return camera_to_srgb(demosaic_bilinear(load_raw(p, profile)), profile, true);
    }
    return read_ppm(p);
}

int cmd_calibrate(const std::string& dark_dir, const std::string& flat_dir, const std::string& profile_path,
                  std::string out_path) {
    Profiled p = load_profile(profile_path, {});
    std::vector<RawImage> darks;
    for (const auto& f : raw_files(dark_dir)) darks.push_back(load_raw(f, p.profile, false));
    std::vector<std::pair<RawImage, RawImage>> flats;
    const auto flat_files = raw_files(flat_dir);
    for (std::size_t i = 0; i + 1 < flat_files.size(); i += 2)
        flats.emplace_back(load_raw(flat_files[i], p.profile), load_raw(flat_files[i + 1], p.profile));

    const CalibrationReport report = calibrate_noise(darks, flats, p.profile);
    p.profile.noise = report.noise;
    if (out_path.empty()) out_path = profile_path;
    write_profile(out_path, p.profile, p.document);

    std::printf("kappa     %.6g  (photon transfer R^2 %.4f, %zu patches)\n", report.noise.kappa,
                report.gain.r_squared, report.gain.points.size());
    std::printf("lambda_r  %.4f  (PPCC peak %.6f, %zu samples)\n", report.noise.lambda_r, report.read_noise.ppcc,
                report.read_noise.samples);
    std::printf("sigma_r   %.6g\n", report.noise.sigma_r);
    std::printf("sigma_b   %.6g\n", report.noise.sigma_b);
    std::printf("s         %.6g\n", report.noise.s);
    return 0;
}

int cmd_synth(const std::string& clean_path, const std::string& profile_path, const std::string& range,
              std::uint64_t seed, const std::vector<std::string>& out_pair) {
    Profiled p = load_profile(profile_path, clean_path);
    detail::require(p.document.contains("noise"), "profile has no noise parameters; run calibrate first");
    const auto [lo, hi] = parse_range(range);
    const RawImage clean = load_raw(clean_path, p.profile);
    const SynthPair pair = synthesize_pair(clean, p.profile.noise, lo, hi, seed);

    json extra = p.document;
    extra["synth"] = {{"seed", seed}, {"factor", pair.factor}, {"factor_range", {lo, hi}}};
    save_raw(out_pair[0], pair.noisy, p.profile);
    save_raw(out_pair[1], pair.clean, p.profile);
    extra["synth"]["role"] = "noisy";
    write_profile(sidecar_path(out_pair[0]), p.profile, extra);
    extra["synth"]["role"] = "clean";
    write_profile(sidecar_path(out_pair[1]), p.profile, extra);
    std::printf("factor %.6f seed %llu\n", pair.factor, static_cast<unsigned long long>(seed));
    return 0;
}

struct EnhanceArgs {
    std::string input, profile, out, color_matrix, grids_in, grids_out;
    bool no_denoise = false, no_color = false;
    EnhanceOptions opts;
};

int cmd_enhance(const EnhanceArgs& args) {
    EnhanceOptions opts = args.opts;
    opts.denoise_enabled = !args.no_denoise;
    opts.color_enabled = !args.no_color;
    const Profiled p = load_profile(args.profile, args.input);
    const RawImage raw = load_raw(args.input, p.profile);
    if (!args.color_matrix.empty()) opts.color = color_matrix_from_json(detail::read_json(args.color_matrix));
    if (!args.grids_in.empty()) opts.grids = grids_from_json(detail::read_json(args.grids_in));

    const EnhanceResult result = enhance_raw(raw, p.profile, opts);
    const fs::path out(args.out);
    if (out.extension() == ".rgb16")
        write_rgb16(out, result.srgb);
    else
        write_ppm(out, result.srgb);
    if (!args.grids_out.empty()) detail::write_json(args.grids_out, to_json(result.grids));

    for (const auto& t : result.timings) std::printf("%-10s %8.3f s\n", t.stage.c_str(), t.seconds);
    std::printf("exposure loss %.6f -> %.6f\n", result.input_exposure_loss, result.output_exposure_loss);
    return 0;
}

int cmd_fit_color(const std::string& source, const std::string& target, int degree, bool constant,
                  const std::string& out) {
    const PolySpec spec{degree, constant};
    spec.validate();
    const ColorFit fit = fit_color_lsq(read_image(source), read_image(target), spec);
    detail::write_json(out, to_json(fit.matrix));
    std::printf("terms %d residual %.6g\n", spec.term_count(), fit.residual);
    return 0;
}

int cmd_metrics(const std::string& a_path, const std::string& b_path, double delta) {
    const RgbImage a = read_image(a_path);
    json line = {{"file", a_path}, {"entropy", entropy(a)}, {"exposure_loss", exposure_loss(a, delta)}};
    if (!b_path.empty()) {
        const RgbImage b = read_image(b_path);
        line["psnr"] = psnr(a, b);
        line["ssim"] = ssim(a, b);
    } else {
        line["psnr"] = nullptr;
        line["ssim"] = nullptr;
    }
    std::cout << line.dump() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rawlume: low-light raw enhancement with joint denoising"};
    app.require_subcommand(1);

    std::string dark_dir, flat_dir, cal_profile, cal_out;
    auto* calibrate = app.add_subcommand("calibrate", "estimate noise parameters from dark and flat frames");
    calibrate->add_option("--dark-dir", dark_dir, "directory of dark .raw frames")->required();
    calibrate->add_option("--flat-dir", flat_dir, "directory of flat .raw frames, consecutive pairs")->required();
    calibrate->add_option("--profile", cal_profile, "camera profile JSON to start from")->required();
    calibrate->add_option("--out", cal_out, "output profile (defaults to --profile)");

    std::string synth_clean, synth_profile, synth_range = "1:16";
    std::uint64_t synth_seed = 0;
    std::vector<std::string> synth_out;
    auto* synth = app.add_subcommand("synth", "darken a clean raw frame and add calibrated noise");
    synth->add_option("--clean", synth_clean, "clean .raw frame")->required();
    synth->add_option("--profile", synth_profile, "camera profile (defaults to the sidecar)");
    synth->add_option("--factor-range", synth_range, "darkening factor range lo:hi")->capture_default_str();
    synth->add_option("--seed", synth_seed, "random seed")->capture_default_str();
    synth->add_option("--out-pair", synth_out, "noisy and clean output paths")->required()->expected(2);

    EnhanceArgs ea;
    auto* enhance = app.add_subcommand("enhance", "enhance a raw frame");
    enhance->add_option("--input", ea.input, "input .raw frame")->required();
    enhance->add_option("--profile", ea.profile, "camera profile (defaults to the sidecar)");
    enhance->add_option("--out", ea.out, "output image (.ppm or .rgb16)")->required();
    enhance->add_option("--iterations", ea.opts.fit.iterations, "number of grids N")->capture_default_str();
    enhance->add_option("--delta", ea.opts.fit.delta, "exposure loss width")->capture_default_str();
    enhance->add_option("--w-tv", ea.opts.fit.w_tv, "grid smoothness weight")->capture_default_str();
    enhance->add_option("--w-mag", ea.opts.fit.w_mag, "grid magnitude weight")->capture_default_str();
    enhance->add_option("--steps", ea.opts.fit.steps, "optimizer steps")->capture_default_str();
    enhance->add_option("--step-size", ea.opts.fit.step_size, "optimizer step size")->capture_default_str();
    enhance->add_option("--momentum", ea.opts.fit.momentum, "optimizer momentum")->capture_default_str();
    enhance->add_option("--lowres", ea.opts.lowres_size, "fitting resolution")->capture_default_str();
    enhance->add_option("--denoise-radius", ea.opts.denoise.radius, "denoiser radius")->capture_default_str();
    enhance->add_flag("--no-denoise", ea.no_denoise, "skip the joint denoiser");
    enhance->add_flag("--no-color", ea.no_color, "skip the color transform");
    enhance->add_option("--color-matrix", ea.color_matrix, "color matrix JSON (identity when absent)");
    enhance->add_option("--grids-in", ea.grids_in, "use these grids instead of fitting");
    enhance->add_option("--grids-out", ea.grids_out, "write the fitted grids as JSON");

    std::string fc_source, fc_target, fc_out;
    int fc_degree = 3;
    bool fc_constant = false;
    auto* fit_color = app.add_subcommand("fit-color", "least-squares polynomial color matrix");
    fit_color->add_option("--source", fc_source, "source image (.ppm or .raw)")->required();
    fit_color->add_option("--target", fc_target, "target image (.ppm or .raw)")->required();
    fit_color->add_option("--degree", fc_degree, "polynomial degree")->capture_default_str();
    fit_color->add_flag("--constant", fc_constant, "include the constant term");
    fit_color->add_option("--out", fc_out, "output JSON")->required();

    std::string m_a, m_b;
    double m_delta = 0.2;
    auto* metrics = app.add_subcommand("metrics", "print quality metrics as a JSON line");
    metrics->add_option("--a", m_a, "image (.ppm or .raw)")->required();
    metrics->add_option("--b", m_b, "reference image for psnr and ssim");
    metrics->add_option("--delta", m_delta, "exposure loss width")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*calibrate) return cmd_calibrate(dark_dir, flat_dir, cal_profile, cal_out);
        if (*synth) return cmd_synth(synth_clean, synth_profile, synth_range, synth_seed, synth_out);
        if (*enhance) return cmd_enhance(ea);
        if (*fit_color) return cmd_fit_color(fc_source, fc_target, fc_degree, fc_constant, fc_out);
        if (*metrics) return cmd_metrics(m_a, m_b, m_delta);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
