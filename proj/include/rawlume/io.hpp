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

// File formats:
//   raw container   "RLRAW001", u32 width, u32 height, width*height u16 samples,
//                   all little-endian, row-major; camera profile in a JSON
//                   sidecar with the same basename and a ".json" extension.
//   PPM             binary P6, 8-bit (16-bit maxval accepted on read).
//   rgb16           headerless interleaved RGB, 16-bit big-endian samples
//                   (PNG sample order).
//   grid set JSON   {"N", "size", "layout", "grids": N arrays of 4096 values}
//   color matrix    {"degree", "with_constant", "rows": 3 x term_count}

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "rawlume/bilateral_grid.hpp"
#include "rawlume/color_transform.hpp"
#include "rawlume/error.hpp"
#include "rawlume/image.hpp"
#include "rawlume/profile.hpp"
#include "rawlume/raw_core.hpp"

namespace rawlume {

using json = nlohmann::json;

inline constexpr char kRawMagic[8] = {'R', 'L', 'R', 'A', 'W', '0', '0', '1'};

struct RawFile {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> samples;
};

inline std::filesystem::path sidecar_path(const std::filesystem::path& path) {
    auto p = path;
    p.replace_extension(".json");
    return p;
}

namespace detail {

inline std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), "cannot open '", path.string(), "' for reading");
    return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

inline void write_bytes(const std::filesystem::path& path, std::span<const unsigned char> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), "cannot open '", path.string(), "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(out), "write to '", path.string(), "' failed");
}

inline std::uint32_t load_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void store_u32le(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

inline json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot open '", path.string(), "' for reading");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail("malformed JSON in '", path.string(), "': ", e.what());
    }
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::trunc);
    require(static_cast<bool>(out), "cannot open '", path.string(), "' for writing");
    out << j.dump(2) << '\n';
}

} // namespace detail

inline void write_raw_container(const std::filesystem::path& path, int width, int height,
                                std::span<const std::uint16_t> samples) {
    detail::require(samples.size() == static_cast<std::size_t>(width) * height,
                    "raw container: sample count does not match dimensions");
    std::vector<unsigned char> bytes(std::begin(kRawMagic), std::end(kRawMagic));
    bytes.reserve(16 + samples.size() * 2);
    detail::store_u32le(bytes, static_cast<std::uint32_t>(width));
    detail::store_u32le(bytes, static_cast<std::uint32_t>(height));
    for (std::uint16_t s : samples) {
        bytes.push_back(static_cast<unsigned char>(s & 0xff));
        bytes.push_back(static_cast<unsigned char>(s >> 8));
    }
    detail::write_bytes(path, bytes);
}

inline RawFile read_raw_container(const std::filesystem::path& path) {
    const auto bytes = detail::read_bytes(path);
    detail::require(bytes.size() >= 16 && std::equal(std::begin(kRawMagic), std::end(kRawMagic), bytes.begin()),
                    "'", path.string(), "' is not a raw container (bad magic)");
    RawFile f;
    f.width = static_cast<int>(detail::load_u32le(bytes.data() + 8));
    f.height = static_cast<int>(detail::load_u32le(bytes.data() + 12));
    const std::size_t n = static_cast<std::size_t>(f.width) * f.height;
    detail::require(bytes.size() == 16 + 2 * n, "'", path.string(), "': expected ", 16 + 2 * n,
                    " bytes for ", f.width, "x", f.height, ", found ", bytes.size());
    f.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        f.samples[i] = static_cast<std::uint16_t>(bytes[16 + 2 * i] | (bytes[17 + 2 * i] << 8));
    return f;
}

inline json to_json(const NoiseParams& p) {
    return {{"kappa", p.kappa}, {"lambda_r", p.lambda_r}, {"sigma_r", p.sigma_r},
            {"sigma_b", p.sigma_b}, {"s", p.s}};
}

inline NoiseParams noise_from_json(const json& j) {
    NoiseParams p;
    p.kappa = j.value("kappa", 0.0);
    p.lambda_r = j.value("lambda_r", 0.0);
    p.sigma_r = j.value("sigma_r", 0.0);
    p.sigma_b = j.value("sigma_b", 0.0);
    p.s = j.value("s", 0.0);
    return p;
}

inline json to_json(const CameraProfile& p) {
    json j;
    j["cfa"] = std::string(to_string(p.cfa));
    j["black_level"] = p.black_level;
    j["white_level"] = p.white_level;
    j["wb_gains"] = p.wb_gains;
    j["cam_to_xyz"] = p.cam_to_xyz;
    j["s"] = p.quantization_step();
    j["noise"] = to_json(p.noise);
    return j;
}

inline CameraProfile profile_from_json(const json& j) {
    CameraProfile p;
    try {
        p.cfa = cfa_from_string(j.value("cfa", std::string("RGGB")));
        p.black_level = j.value("black_level", p.black_level);
        p.white_level = j.value("white_level", p.white_level);
        if (j.contains("wb_gains")) p.wb_gains = j.at("wb_gains").get<std::array<double, 3>>();
        if (j.contains("cam_to_xyz")) p.cam_to_xyz = j.at("cam_to_xyz").get<Matrix3>();
        if (j.contains("noise")) p.noise = noise_from_json(j.at("noise"));
    } catch (const json::exception& e) {
        detail::fail("malformed camera profile: ", e.what());
    }
    p.validate();
    return p;
}

inline CameraProfile read_profile(const std::filesystem::path& path) {
    return profile_from_json(detail::read_json(path));
}

// Writes the profile, keeping any extra keys already present in the file.
inline void write_profile(const std::filesystem::path& path, const CameraProfile& profile,
                          const json& extra = json::object()) {
    json j = extra.is_object() ? extra : json::object();
    j.update(to_json(profile));
    detail::write_json(path, j);
}

inline RawImage load_raw(const std::filesystem::path& path, const CameraProfile& profile,
                         bool clamp_low = true) {
    const RawFile f = read_raw_container(path);
    return normalize_raw(f.samples, f.width, f.height, profile, clamp_low);
}

inline void save_raw(const std::filesystem::path& path, const RawImage& raw, const CameraProfile& profile) {
    const auto dn = denormalize_raw(raw, profile);
    write_raw_container(path, raw.width(), raw.height(), dn);
}

namespace detail {

inline std::uint16_t quantize(double v, double maxval) {
    return static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * maxval));
}

} // namespace detail

inline void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
    const std::string header = "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    std::vector<unsigned char> bytes(header.begin(), header.end());
    bytes.reserve(header.size() + img[0].size() * 3);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < 3; ++c)
                bytes.push_back(static_cast<unsigned char>(detail::quantize(img[c](x, y), 255.0)));
    detail::write_bytes(path, bytes);
}

inline void write_rgb16(const std::filesystem::path& path, const RgbImage& img) {
    std::vector<unsigned char> bytes;
    bytes.reserve(img[0].size() * 6);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < 3; ++c) {
                const std::uint16_t v = detail::quantize(img[c](x, y), 65535.0);
                bytes.push_back(static_cast<unsigned char>(v >> 8));
                bytes.push_back(static_cast<unsigned char>(v & 0xff));
            }
    detail::write_bytes(path, bytes);
}

// Reads a binary P6 file into an encoded-sRGB image scaled to [0,1].
inline RgbImage read_ppm(const std::filesystem::path& path) {
    const auto bytes = detail::read_bytes(path);
    std::size_t pos = 0;
    auto next_token = [&]() {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
        std::string tok;
        while (pos < bytes.size() && !std::isspace(bytes[pos])) tok.push_back(static_cast<char>(bytes[pos++]));
        return tok;
    };
    detail::require(next_token() == "P6", "'", path.string(), "' is not a binary PPM (P6)");
    int w = 0, h = 0, maxval = 0;
    try {
        w = std::stoi(next_token());
        h = std::stoi(next_token());
        maxval = std::stoi(next_token());
    } catch (const std::exception&) {
        detail::fail("'", path.string(), "': malformed PPM header");
    }
    ++pos;  // single whitespace before the raster
    detail::require(w > 0 && h > 0 && maxval > 0 && maxval <= 65535, "'", path.string(), "': bad PPM header");
    const int bpc = maxval > 255 ? 2 : 1;
    detail::require(bytes.size() >= pos + static_cast<std::size_t>(w) * h * 3 * bpc, "'", path.string(),
                    "': truncated PPM raster");
    RgbImage img(w, h, ColorState::EncodedSrgb);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                unsigned v = bytes[pos++];
                if (bpc == 2) v = (v << 8) | bytes[pos++];
                img[c](x, y) = static_cast<double>(v) / maxval;
            }
    return img;
}

inline json to_json(const GridSet& grids) {
    json arr = json::array();
    for (const auto& g : grids) arr.push_back(std::vector<double>(g.values().begin(), g.values().end()));
    return {{"N", grids.size()}, {"size", BilateralGrid::kSize}, {"layout", "x-fastest"}, {"grids", arr}};
}

inline GridSet grids_from_json(const json& j) {
    GridSet grids;
    try {
        const auto& arr = j.at("grids");
        const std::size_t n = j.value("N", arr.size());
        detail::require(n == arr.size(), "grid set declares N=", n, " but holds ", arr.size(), " grids");
        for (const auto& g : arr) {
            const auto values = g.get<std::vector<double>>();
            detail::require(values.size() == BilateralGrid::kCells, "each grid needs ", BilateralGrid::kCells,
                            " values, got ", values.size());
            BilateralGrid grid;
            std::copy(values.begin(), values.end(), grid.values().begin());
            detail::require(grid.all_finite(), "grid values must be finite");
            grids.push_back(std::move(grid));
        }
    } catch (const json::exception& e) {
        detail::fail("malformed grid set: ", e.what());
    }
    return grids;
}

inline json to_json(const ColorMatrix& m) {
    const int t = m.spec.term_count();
    json rows = json::array();
    for (int c = 0; c < 3; ++c) {
        std::vector<double> row(t);
        for (int k = 0; k < t; ++k) row[k] = m(c, k);
        rows.push_back(row);
    }
    return {{"degree", m.spec.degree}, {"with_constant", m.spec.with_constant}, {"rows", rows}};
}

inline ColorMatrix color_matrix_from_json(const json& j) {
    try {
        PolySpec spec{j.at("degree").get<int>(), j.at("with_constant").get<bool>()};
        ColorMatrix m = ColorMatrix::zeros(spec);
        const auto rows = j.at("rows").get<std::vector<std::vector<double>>>();
        detail::require(rows.size() == 3, "color matrix needs 3 rows");
        for (int c = 0; c < 3; ++c) {
            detail::require(rows[c].size() == static_cast<std::size_t>(spec.term_count()), "color matrix row ", c,
                            " has ", rows[c].size(), " terms, expected ", spec.term_count());
            for (int k = 0; k < spec.term_count(); ++k) m(c, k) = rows[c][k];
        }
        m.validate();
        return m;
    } catch (const json::exception& e) {
        detail::fail("malformed color matrix: ", e.what());
    }
}

} // namespace rawlume
