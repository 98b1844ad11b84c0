#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ctkit/common.hpp"
#include "ctkit/image.hpp"
#include "ctkit/sinogram.hpp"

namespace ctkit {

/// Raw CTR1 raster payload: little-endian u32 width/height/channels header
/// behind the `CTR1` magic, then channel-major rows of 32-bit floats.
struct RasterData {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint32_t channels = 1;
    std::vector<float> data;
};

namespace detail {

inline void put_u32(std::string& buf, std::uint32_t v) {
    buf.push_back(static_cast<char>(v & 0xff));
    buf.push_back(static_cast<char>((v >> 8) & 0xff));
    buf.push_back(static_cast<char>((v >> 16) & 0xff));
    buf.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline void put_f32(std::string& buf, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u32(buf, bits);
}

inline std::uint32_t get_u32(const std::string& buf, std::size_t off) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(buf[off])) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(buf[off + 1])) << 8) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(buf[off + 2])) << 16) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(buf[off + 3])) << 24);
}

inline float get_f32(const std::string& buf, std::size_t off) {
    const std::uint32_t bits = get_u32(buf, off);
    float v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

inline std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), "cannot open file for writing: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    require(out.good(), "short write: " + path);
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

inline void write_ctr1(const std::string& path, const RasterData& r) {
    require(r.data.size() == static_cast<std::size_t>(r.width) * r.height * r.channels,
            "write_ctr1: data length mismatch");
    std::string buf;
    buf.reserve(16 + r.data.size() * 4);
    buf += "CTR1";
    detail::put_u32(buf, r.width);
    detail::put_u32(buf, r.height);
    detail::put_u32(buf, r.channels);
    for (float v : r.data) detail::put_f32(buf, v);
    detail::write_file_bytes(path, buf);
}

inline RasterData read_ctr1(const std::string& path) {
    const std::string buf = detail::read_file_bytes(path);
    require(buf.size() >= 16 && buf.compare(0, 4, "CTR1") == 0,
            "read_ctr1: not a CTR1 file: " + path);
    RasterData r;
    r.width = detail::get_u32(buf, 4);
    r.height = detail::get_u32(buf, 8);
    r.channels = detail::get_u32(buf, 12);
    const std::size_t count = static_cast<std::size_t>(r.width) * r.height * r.channels;
    require(buf.size() == 16 + count * 4, "read_ctr1: truncated file: " + path);
    r.data.resize(count);
    for (std::size_t i = 0; i < count; ++i) r.data[i] = detail::get_f32(buf, 16 + i * 4);
    return r;
}

// ---- sidecar text headers (key=value lines) --------------------------------

using Sidecar = std::map<std::string, std::string>;

inline std::string sidecar_path(const std::string& ctr_path) { return ctr_path + ".meta"; }

inline void write_sidecar(const std::string& ctr_path, const Sidecar& kv) {
    std::string buf;
    for (const auto& [k, v] : kv) buf += k + "=" + v + "\n";
    detail::write_file_bytes(sidecar_path(ctr_path), buf);
}

inline Sidecar read_sidecar(const std::string& ctr_path) {
    const std::string buf = detail::read_file_bytes(sidecar_path(ctr_path));
    Sidecar kv;
    std::istringstream in(buf);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos || line.empty()) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

inline Sidecar geometry_sidecar(const ParallelGeometry& geom) {
    Sidecar kv;
    std::string angles;
    for (std::size_t i = 0; i < geom.angles.size(); ++i) {
        if (i) angles += ",";
        angles += detail::format_double(geom.angles[i]);
    }
    kv["angles"] = angles;
    kv["detector_spacing"] = detail::format_double(geom.detector_spacing);
    kv["pixel_size"] = detail::format_double(geom.image.pixel_size);
    kv["image_width"] = std::to_string(geom.image.width);
    kv["image_height"] = std::to_string(geom.image.height);
    return kv;
}

inline ParallelGeometry geometry_from_sidecar(const Sidecar& kv) {
    require(kv.count("angles") && kv.count("detector_spacing") && kv.count("pixel_size") &&
                kv.count("image_width") && kv.count("image_height"),
            "sidecar missing geometry keys");
    std::vector<double> angles;
    std::istringstream as(kv.at("angles"));
    std::string tok;
    while (std::getline(as, tok, ',')) angles.push_back(std::stod(tok));
    GridShape img(std::stoul(kv.at("image_width")), std::stoul(kv.at("image_height")),
                  std::stod(kv.at("pixel_size")));
    // n_detectors comes from the raster header; placeholder 1 until bound.
    ParallelGeometry geom;
    geom.angles = std::move(angles);
    geom.detector_spacing = std::stod(kv.at("detector_spacing"));
    geom.image = img;
    return geom;
}

// ---- typed file helpers -----------------------------------------------------

inline void write_image(const std::string& path, const ImageGrid& img) {
    RasterData r;
    r.width = static_cast<std::uint32_t>(img.width);
    r.height = static_cast<std::uint32_t>(img.height);
    r.channels = 1;
    r.data.assign(img.data.begin(), img.data.end());
    write_ctr1(path, r);
    Sidecar kv;
    kv["pixel_size"] = detail::format_double(img.pixel_size);
    write_sidecar(path, kv);
}

inline ImageGrid read_image(const std::string& path, double pixel_size_override = 0.0) {
    const RasterData r = read_ctr1(path);
    require(r.channels == 1, "read_image: expected a single channel: " + path);
    double px = pixel_size_override;
    if (px <= 0.0) {
        px = 1.0;
        std::ifstream probe(sidecar_path(path));
        if (probe.good()) {
            const Sidecar kv = read_sidecar(path);
            if (kv.count("pixel_size")) px = std::stod(kv.at("pixel_size"));
        }
    }
    ImageGrid img(r.width, r.height, px);
    img.data.assign(r.data.begin(), r.data.end());
    return img;
}

inline void write_sinogram(const std::string& path, const Sinogram& sino) {
    RasterData r;
    r.width = static_cast<std::uint32_t>(sino.n_detectors());
    r.height = static_cast<std::uint32_t>(sino.n_angles());
    r.channels = 1;
    r.data.assign(sino.data.begin(), sino.data.end());
    write_ctr1(path, r);
    write_sidecar(path, geometry_sidecar(sino.geometry));
}

inline Sinogram read_sinogram(const std::string& path) {
    const RasterData r = read_ctr1(path);
    require(r.channels == 1, "read_sinogram: expected a single channel: " + path);
    ParallelGeometry geom = geometry_from_sidecar(read_sidecar(path));
    geom.n_detectors = r.width;
    require(geom.n_angles() == r.height, "read_sinogram: angle count mismatch with sidecar");
    geom.validate();
    Sinogram sino(geom);
    sino.data.assign(r.data.begin(), r.data.end());
    return sino;
}

inline void write_intensity(const std::string& path, const IntensityRecord& rec) {
    RasterData r;
    r.width = static_cast<std::uint32_t>(rec.geometry.n_detectors);
    r.height = static_cast<std::uint32_t>(rec.geometry.n_angles());
    r.channels = 1;
    r.data.assign(rec.counts.begin(), rec.counts.end());
    write_ctr1(path, r);
    Sidecar kv = geometry_sidecar(rec.geometry);
    kv["i0"] = detail::format_double(rec.i0);
    kv["noisy"] = rec.noisy ? "1" : "0";
    write_sidecar(path, kv);
}

inline IntensityRecord read_intensity(const std::string& path) {
    const RasterData r = read_ctr1(path);
    const Sidecar kv = read_sidecar(path);
    require(kv.count("i0"), "read_intensity: sidecar missing i0: " + path);
    ParallelGeometry geom = geometry_from_sidecar(kv);
    geom.n_detectors = r.width;
    geom.validate();
    IntensityRecord rec(geom, std::stod(kv.at("i0")), kv.count("noisy") && kv.at("noisy") == "1");
    rec.counts.assign(r.data.begin(), r.data.end());
    return rec;
}

/// 16-bit min-max windowed P5 export for human viewing.
inline void write_pgm16(const std::string& path, const ImageGrid& img) {
    double lo = img.data.empty() ? 0.0 : img.data[0];
    double hi = lo;
    for (double v : img.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double range = hi - lo;
    std::string buf = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                      "\n65535\n";
    for (double v : img.data) {
        const double t = range > 0.0 ? (v - lo) / range : 0.0;
        const auto q = static_cast<std::uint16_t>(std::lround(t * 65535.0));
        buf.push_back(static_cast<char>((q >> 8) & 0xff)); // PGM is big-endian
        buf.push_back(static_cast<char>(q & 0xff));
    }
    detail::write_file_bytes(path, buf);
}

inline std::vector<double> read_angles_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open angles file: " + path);
    std::vector<double> angles;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        angles.push_back(std::stod(line));
    }
    require(!angles.empty(), "angles file is empty: " + path);
    return angles;
}

/// FNV-1a over file bytes; manifest fingerprints, not security.
inline std::uint64_t fnv1a_file(const std::string& path) {
    const std::string bytes = detail::read_file_bytes(path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace ctkit
