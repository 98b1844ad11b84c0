#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ctkit/dataset.hpp"
#include "ctkit/metrics.hpp"
#include "ctkit/nn/checkpoint.hpp"
#include "ctkit/train.hpp"

namespace ctkit {

struct MethodMetrics {
    std::string method;
    std::vector<double> rmse_per_item;
    std::vector<double> psnr_per_item;
    double mean_rmse = 0.0;
    double mean_psnr = 0.0;
};

struct EvalResult {
    std::vector<MethodMetrics> methods;

    const MethodMetrics& by_name(const std::string& name) const {
        for (const auto& m : methods)
            if (m.method == name) return m;
        throw invalid_input("evaluate: no such method in result: " + name);
    }
};

/// Score the test split: raw FBP always, plus the denoiser applied to FBP
/// and the end-to-end model applied to the noisy sinogram when checkpoints
/// are given. Writes metrics.csv, reconstruction CTR1 files and a four-way
/// comparison panel (FBP | denoised | end-to-end | truth) per item.
inline EvalResult evaluate(const DatasetManifest& manifest, const std::string& denoiser_ckpt,
                           const std::string& e2e_ckpt, const std::string& out_dir) {
    const auto test = manifest.split("test");
    require(!test.empty(), "evaluate: manifest has no test split");
    std::filesystem::create_directories(out_dir);

    bool have_denoiser = !denoiser_ckpt.empty();
    bool have_e2e = !e2e_ckpt.empty();
    nn::Network<float> denoiser, e2e;
    if (have_denoiser) denoiser = nn::load_network<float>(denoiser_ckpt);
    if (have_e2e) e2e = nn::load_network<float>(e2e_ckpt);

    EvalResult result;
    result.methods.push_back({"fbp", {}, {}, 0, 0});
    if (have_denoiser) result.methods.push_back({"denoiser", {}, {}, 0, 0});
    if (have_e2e) result.methods.push_back({"e2e", {}, {}, 0, 0});

    auto record = [&](const std::string& method, const ImageGrid& recon, const ImageGrid& truth) {
        double range = 0.0;
        for (double v : truth.data) range = std::max(range, v);
        for (auto& m : result.methods)
            if (m.method == method) {
                const double e = rmse(recon, truth);
                m.rmse_per_item.push_back(e);
                m.psnr_per_item.push_back(psnr(range, e));
            }
    };

    for (std::size_t idx = 0; idx < test.size(); ++idx) {
        const SampleRecord& s = *test[idx];
        const ImageGrid truth = read_image(manifest.resolve(s.phantom));
        const ImageGrid fbp_img = read_image(manifest.resolve(s.fbp));
        record("fbp", fbp_img, truth);

        char tag[32];
        std::snprintf(tag, sizeof tag, "%04zu", s.index);

        ImageGrid denoised, mapped;
        if (have_denoiser) {
            auto out = denoiser.forward(tensor_from_image<float>(fbp_img));
            denoised = image_from_tensor(out, truth.pixel_size);
            record("denoiser", denoised, truth);
            write_image(out_dir + "/denoised_" + tag + ".ctr", denoised);
        }
        if (have_e2e) {
            const Sinogram noisy = read_sinogram(manifest.resolve(s.sino_noisy));
            auto out = e2e.forward(tensor_from_sinogram<float>(noisy));
            mapped = image_from_tensor(out, truth.pixel_size);
            record("e2e", mapped, truth);
            write_image(out_dir + "/e2e_" + tag + ".ctr", mapped);
        }

        // four-way panel, shared window
        const std::size_t W = truth.width, H = truth.height, gap = 2;
        ImageGrid panel(4 * W + 3 * gap, H, truth.pixel_size);
        auto blit = [&](const ImageGrid& src, std::size_t slot) {
            if (src.data.empty()) return;
            const std::size_t x0 = slot * (W + gap);
            for (std::size_t r = 0; r < H; ++r)
                for (std::size_t c = 0; c < W; ++c) panel.at(r, x0 + c) = src.at(r, c);
        };
        blit(fbp_img, 0);
        blit(denoised, 1);
        blit(mapped, 2);
        blit(truth, 3);
        write_pgm16(out_dir + "/panel_" + tag + ".pgm", panel);
    }

    std::ofstream csv(out_dir + "/metrics.csv");
    require(csv.good(), "evaluate: cannot open metrics.csv in " + out_dir);
    csv << "method,item,rmse,psnr\n";
    for (auto& m : result.methods) {
        double sr = 0.0, sp = 0.0;
        for (std::size_t i = 0; i < m.rmse_per_item.size(); ++i) {
            csv << m.method << "," << i << "," << m.rmse_per_item[i] << "," << m.psnr_per_item[i]
                << "\n";
            sr += m.rmse_per_item[i];
            sp += m.psnr_per_item[i];
        }
        m.mean_rmse = sr / static_cast<double>(m.rmse_per_item.size());
        m.mean_psnr = sp / static_cast<double>(m.psnr_per_item.size());
        csv << m.method << ",mean," << m.mean_rmse << "," << m.mean_psnr << "\n";
    }
    return result;
}

} // namespace ctkit
