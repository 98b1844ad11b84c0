#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctkit/acquisition.hpp"
#include "ctkit/common.hpp"
#include "ctkit/fbp.hpp"
#include "ctkit/io.hpp"
#include "ctkit/parallel.hpp"
#include "ctkit/phantom.hpp"
#include "ctkit/projector.hpp"

namespace ctkit {

struct DatasetOptions {
    std::size_t n_train = 200;
    std::size_t n_val = 0; // 0: one tenth of n_train, at least 1
    std::size_t n_test = 20;
    std::size_t image_size = 128;
    std::size_t n_angles = 20;
    std::size_t n_detectors = 0;     // 0: diagonal-covering default
    double detector_spacing = 0.0;   // 0: pixel size
    double i0 = 1e4;
    std::uint64_t seed = 0;
    PhantomKind kind = PhantomKind::RandomEllipses;
    FilterSpec fbp_filter{};

    std::size_t val_count() const { return n_val ? n_val : std::max<std::size_t>(1, n_train / 10); }
};

/// One dataset sample: file names are relative to the manifest directory.
struct SampleRecord {
    std::string split; // train | val | test
    std::size_t index = 0;
    std::string phantom, sino_clean, sino_noisy, fbp;
    std::map<std::string, std::string> hashes; // file name -> fnv1a hex
};

struct DatasetManifest {
    ParallelGeometry geometry;
    double i0 = 0.0;
    std::uint64_t seed = 0;
    std::vector<SampleRecord> samples;
    std::string root_dir; // set when read/written

    std::vector<const SampleRecord*> split(const std::string& name) const {
        std::vector<const SampleRecord*> out;
        for (const auto& s : samples)
            if (s.split == name) out.push_back(&s);
        return out;
    }

    std::string resolve(const std::string& relative) const {
        return (std::filesystem::path(root_dir) / relative).string();
    }
};

namespace detail {

inline nlohmann::json geometry_to_json(const ParallelGeometry& geom) {
    return {
        {"angles", geom.angles},
        {"n_detectors", geom.n_detectors},
        {"detector_spacing", geom.detector_spacing},
        {"image_width", geom.image.width},
        {"image_height", geom.image.height},
        {"pixel_size", geom.image.pixel_size},
    };
}

inline ParallelGeometry geometry_from_json(const nlohmann::json& j) {
    ParallelGeometry geom;
    geom.angles = j.at("angles").get<std::vector<double>>();
    geom.n_detectors = j.at("n_detectors").get<std::size_t>();
    geom.detector_spacing = j.at("detector_spacing").get<double>();
    geom.image = GridShape(j.at("image_width").get<std::size_t>(),
                           j.at("image_height").get<std::size_t>(),
                           j.at("pixel_size").get<double>());
    geom.validate();
    return geom;
}

} // namespace detail

inline void write_manifest(const std::string& path, const DatasetManifest& m) {
    std::ofstream out(path);
    require(out.good(), "write_manifest: cannot open " + path);
    nlohmann::json header = {
        {"type", "header"},
        {"geometry", detail::geometry_to_json(m.geometry)},
        {"i0", m.i0},
        {"seed", m.seed},
        {"n_samples", m.samples.size()},
    };
    out << header.dump() << "\n";
    for (const auto& s : m.samples) {
        nlohmann::json rec = {
            {"type", "sample"},  {"split", s.split},           {"index", s.index},
            {"phantom", s.phantom}, {"sino_clean", s.sino_clean}, {"sino_noisy", s.sino_noisy},
            {"fbp", s.fbp},      {"hashes", s.hashes},
        };
        out << rec.dump() << "\n";
    }
}

inline DatasetManifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "read_manifest: cannot open " + path);
    DatasetManifest m;
    m.root_dir = std::filesystem::path(path).parent_path().string();
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        if (j.at("type") == "header") {
            m.geometry = detail::geometry_from_json(j.at("geometry"));
            m.i0 = j.at("i0").get<double>();
            m.seed = j.at("seed").get<std::uint64_t>();
            have_header = true;
        } else {
            SampleRecord s;
            s.split = j.at("split").get<std::string>();
            s.index = j.at("index").get<std::size_t>();
            s.phantom = j.at("phantom").get<std::string>();
            s.sino_clean = j.at("sino_clean").get<std::string>();
            s.sino_noisy = j.at("sino_noisy").get<std::string>();
            s.fbp = j.at("fbp").get<std::string>();
            s.hashes = j.at("hashes").get<std::map<std::string, std::string>>();
            m.samples.push_back(std::move(s));
        }
    }
    require(have_header, "read_manifest: missing header record: " + path);
    return m;
}

/// Generate phantoms, clean and low-dose sinograms and FBP reconstructions
/// for disjoint train/val/test splits, all as CTR1 files plus a JSON-lines
/// manifest. Per-sample seeds are split from the master seed, so samples can
/// be generated in parallel with identical results.
inline DatasetManifest build_dataset(const DatasetOptions& opt, const std::string& out_dir) {
    require(opt.n_train >= 1 && opt.n_test >= 1, "build_dataset: counts must be >= 1");
    std::filesystem::create_directories(out_dir);

    const GridShape img(opt.image_size, opt.image_size, 1.0);
    ParallelGeometry geom = make_geometry(opt.n_angles, img, opt.n_detectors, opt.detector_spacing);

    DatasetManifest manifest;
    manifest.geometry = geom;
    manifest.i0 = opt.i0;
    manifest.seed = opt.seed;
    manifest.root_dir = out_dir;

    struct Plan {
        std::string split;
        std::size_t index;     // index within split
        std::size_t ordinal;   // global sample number, drives seeding
    };
    std::vector<Plan> plans;
    std::size_t ordinal = 0;
    for (std::size_t i = 0; i < opt.n_train; ++i) plans.push_back({"train", i, ordinal++});
    for (std::size_t i = 0; i < opt.val_count(); ++i) plans.push_back({"val", i, ordinal++});
    for (std::size_t i = 0; i < opt.n_test; ++i) plans.push_back({"test", i, ordinal++});

    manifest.samples.resize(plans.size());
    parallel_for(plans.size(), [&](std::size_t p) {
        const Plan& plan = plans[p];
        char stem[64];
        std::snprintf(stem, sizeof stem, "%s_%04zu", plan.split.c_str(), plan.index);

        PhantomSpec spec;
        spec.kind = opt.kind;
        spec.size = opt.image_size;
        spec.seed = derive_seed(opt.seed, 2 * plan.ordinal);
        const ImageGrid phantom = make_phantom(spec);

        const Sinogram clean = forward_project(phantom, geom);
        const IntensityRecord counts =
            simulate_intensity(clean, opt.i0, true, derive_seed(opt.seed, 2 * plan.ordinal + 1));
        const Sinogram noisy = log_normalize(counts);
        const ImageGrid recon = fbp_reconstruct(noisy, opt.fbp_filter);

        SampleRecord rec;
        rec.split = plan.split;
        rec.index = plan.index;
        rec.phantom = std::string(stem) + "_phantom.ctr";
        rec.sino_clean = std::string(stem) + "_sino.ctr";
        rec.sino_noisy = std::string(stem) + "_noisy.ctr";
        rec.fbp = std::string(stem) + "_fbp.ctr";

        const std::string root = out_dir;
        write_image(root + "/" + rec.phantom, phantom);
        write_sinogram(root + "/" + rec.sino_clean, clean);
        write_sinogram(root + "/" + rec.sino_noisy, noisy);
        write_image(root + "/" + rec.fbp, recon);
        for (const std::string& f : {rec.phantom, rec.sino_clean, rec.sino_noisy, rec.fbp})
            rec.hashes[f] = hex64(fnv1a_file(root + "/" + f));
        manifest.samples[p] = std::move(rec);
    });

    write_manifest(out_dir + "/manifest.jsonl", manifest);
    return manifest;
}

} // namespace ctkit
