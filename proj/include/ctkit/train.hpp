#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "ctkit/arch.hpp"
#include "ctkit/dataset.hpp"
#include "ctkit/nn/checkpoint.hpp"
#include "ctkit/nn/network.hpp"
#include "ctkit/nn/optim.hpp"

namespace ctkit {

struct TrainOptions {
    std::size_t epochs = 10;
    std::size_t batch = 4;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    bool adam_paper_bias = false;
    bool use_sgd = false; // plain SGD instead of the adaptive update
    std::string checkpoint_path; // best-val model; empty skips saving
    std::string log_path;        // per-epoch csv; empty skips
    std::uint64_t dense_param_guard = std::uint64_t{1} << 26;
};

struct TrainLog {
    std::vector<double> train_loss; // per epoch
    std::vector<double> val_loss;
    std::size_t best_epoch = 0;
};

template <typename T>
nn::Tensor<T> tensor_from_image(const ImageGrid& img) {
    nn::Tensor<T> t({1, 1, img.height, img.width});
    for (std::size_t i = 0; i < img.data.size(); ++i) t.data[i] = static_cast<T>(img.data[i]);
    return t;
}

template <typename T>
nn::Tensor<T> tensor_from_sinogram(const Sinogram& sino) {
    nn::Tensor<T> t({1, 1, sino.n_angles(), sino.n_detectors()});
    for (std::size_t i = 0; i < sino.data.size(); ++i) t.data[i] = static_cast<T>(sino.data[i]);
    return t;
}

template <typename T>
ImageGrid image_from_tensor(const nn::Tensor<T>& t, double pixel_size = 1.0) {
    require(t.rank() == 4 && t.dim(0) == 1 && t.dim(1) == 1,
            "image_from_tensor: expected a (1,1,H,W) tensor");
    ImageGrid img(t.dim(3), t.dim(2), pixel_size);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        img.data[i] = static_cast<double>(t.data[i]);
    return img;
}

namespace detail {

template <typename T>
nn::Tensor<T> stack_batch(const std::vector<nn::Tensor<T>>& items,
                          const std::vector<std::size_t>& indices, std::size_t lo,
                          std::size_t hi) {
    const auto& first = items[indices[lo]];
    std::vector<std::size_t> shape = first.shape;
    shape[0] = hi - lo;
    nn::Tensor<T> out(shape);
    const std::size_t per = first.numel();
    for (std::size_t k = lo; k < hi; ++k)
        std::copy_n(items[indices[k]].data.data(), per, out.data.data() + (k - lo) * per);
    return out;
}

template <typename T>
double dataset_loss(nn::Network<T>& net, const std::vector<nn::Tensor<T>>& inputs,
                    const std::vector<nn::Tensor<T>>& targets, std::size_t batch) {
    std::vector<std::size_t> order(inputs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t lo = 0; lo < order.size(); lo += batch) {
        const std::size_t hi = std::min(order.size(), lo + batch);
        auto in = stack_batch(inputs, order, lo, hi);
        auto tg = stack_batch(targets, order, lo, hi);
        const auto out = net.forward(in);
        total += nn::mse_loss(out, tg).first * static_cast<double>(hi - lo);
        count += hi - lo;
    }
    return total / static_cast<double>(count);
}

} // namespace detail

/// Shuffled mini-batch training against the mean-squared-error objective.
/// Epoch losses are sample-weighted means; a non-finite loss aborts with a
/// diagnostic. When a validation set and checkpoint path are given, the
/// best-validation parameters are the ones saved.
template <typename T>
TrainLog train_network(nn::Network<T>& net, const std::vector<nn::Tensor<T>>& train_inputs,
                       const std::vector<nn::Tensor<T>>& train_targets,
                       const std::vector<nn::Tensor<T>>& val_inputs,
                       const std::vector<nn::Tensor<T>>& val_targets, const TrainOptions& opt) {
    require(train_inputs.size() == train_targets.size() && !train_inputs.empty(),
            "train_network: empty or mismatched training set");
    require(val_inputs.size() == val_targets.size(), "train_network: mismatched validation set");
    require(opt.epochs >= 1 && opt.batch >= 1, "train_network: epochs and batch must be >= 1");

    nn::AdamState<T> adam;
    adam.lr = opt.lr;
    adam.paper_bias = opt.adam_paper_bias;
    auto params = net.param_tensors();
    adam.attach(params);

    std::mt19937_64 shuffle_rng(derive_seed(opt.seed, 0xBA7C4E5));
    std::vector<std::size_t> order(train_inputs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainLog log;
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<nn::Tensor<T>> best_params;

    for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_loss = 0.0;
        std::size_t seen = 0;
        for (std::size_t lo = 0; lo < order.size(); lo += opt.batch) {
            const std::size_t hi = std::min(order.size(), lo + opt.batch);
            auto in = detail::stack_batch(train_inputs, order, lo, hi);
            auto tg = detail::stack_batch(train_targets, order, lo, hi);

            const auto out = net.forward(in);
            auto [loss, grad] = nn::mse_loss(out, tg);
            if (!std::isfinite(loss))
                throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                         std::to_string(epoch) + ", batch offset " +
                                         std::to_string(lo));
            epoch_loss += loss * static_cast<double>(hi - lo);
            seen += hi - lo;

            net.zero_grads();
            net.backward(grad);
            if (opt.use_sgd)
                nn::sgd_step(params, net.grad_tensors(), opt.lr);
            else
                adam.step(params, net.grad_tensors());
        }
        log.train_loss.push_back(epoch_loss / static_cast<double>(seen));

        if (!val_inputs.empty()) {
            const double vl = detail::dataset_loss(net, val_inputs, val_targets, opt.batch);
            log.val_loss.push_back(vl);
            if (vl < best_val) {
                best_val = vl;
                log.best_epoch = epoch;
                best_params.clear();
                for (const auto* p : params) best_params.push_back(*p);
            }
        }
    }

    if (!best_params.empty()) {
        for (std::size_t i = 0; i < params.size(); ++i) *params[i] = best_params[i];
    }
    if (!opt.checkpoint_path.empty()) nn::save_network(opt.checkpoint_path, net);
    if (!opt.log_path.empty()) {
        std::ofstream out(opt.log_path);
        require(out.good(), "train_network: cannot open log " + opt.log_path);
        out << "epoch,train_loss,val_loss\n";
        for (std::size_t e = 0; e < log.train_loss.size(); ++e) {
            out << e << "," << log.train_loss[e] << ",";
            if (e < log.val_loss.size()) out << log.val_loss[e];
            out << "\n";
        }
    }
    return log;
}

namespace detail {

template <typename T>
void load_split_tensors(const DatasetManifest& manifest, const std::string& split,
                        bool sinogram_inputs, std::vector<nn::Tensor<T>>& inputs,
                        std::vector<nn::Tensor<T>>& targets) {
    for (const SampleRecord* s : manifest.split(split)) {
        if (sinogram_inputs)
            inputs.push_back(tensor_from_sinogram<T>(read_sinogram(manifest.resolve(s->sino_noisy))));
        else
            inputs.push_back(tensor_from_image<T>(read_image(manifest.resolve(s->fbp))));
        targets.push_back(tensor_from_image<T>(read_image(manifest.resolve(s->phantom))));
    }
}

} // namespace detail

/// Post-processing route: learn phantom images from their streaky FBP
/// reconstructions.
inline std::pair<nn::Network<float>, TrainLog> train_denoiser(const DatasetManifest& manifest,
                                                              const DenoiserArch& arch,
                                                              const TrainOptions& opt) {
    std::vector<nn::Tensor<float>> in, tg, vin, vtg;
    detail::load_split_tensors(manifest, "train", false, in, tg);
    detail::load_split_tensors(manifest, "val", false, vin, vtg);
    require(!in.empty(), "train_denoiser: manifest has no training samples");

    auto net = build_denoiser<float>(arch, derive_seed(opt.seed, 0xD0153));
    TrainLog log = train_network(net, in, tg, vin, vtg, opt);
    return {std::move(net), std::move(log)};
}

/// End-to-end route: learn phantom images straight from noisy sinograms.
/// Rejects architectures whose dense block exceeds the parameter guard.
inline std::pair<nn::Network<float>, TrainLog> train_end_to_end(const DatasetManifest& manifest,
                                                                const AutomapArch& arch,
                                                                const TrainOptions& opt) {
    const ParamEstimate est = estimate_params(arch);
    require(est.param_count <= opt.dense_param_guard,
            "train_end_to_end: dense parameter count " + std::to_string(est.param_count) +
                " (" + std::to_string(est.memory_bytes) + " bytes at 4 B/param) exceeds guard " +
                std::to_string(opt.dense_param_guard) +
                "; shrink the image/angle count or raise the guard");
    require(arch.n_angles == manifest.geometry.n_angles() &&
                arch.n_detectors == manifest.geometry.n_detectors &&
                arch.image_side == manifest.geometry.image.width,
            "train_end_to_end: architecture does not match manifest geometry");

    std::vector<nn::Tensor<float>> in, tg, vin, vtg;
    detail::load_split_tensors(manifest, "train", true, in, tg);
    detail::load_split_tensors(manifest, "val", true, vin, vtg);
    require(!in.empty(), "train_end_to_end: manifest has no training samples");

    auto net = build_automap<float>(arch, derive_seed(opt.seed, 0xA7703A));
    TrainLog log = train_network(net, in, tg, vin, vtg, opt);
    return {std::move(net), std::move(log)};
}

} // namespace ctkit
