#pragma once

#include <cstdint>
#include <random>

#include "ctkit/common.hpp"
#include "ctkit/nn/layers.hpp"
#include "ctkit/nn/network.hpp"

namespace ctkit {

/// Mixed-scale dense denoiser: `depth` dilated 3x3 convolutions with one
/// feature channel each, dilation cycling (i mod 10) + 1, every convolution
/// consuming the input joined with all previous outputs, closed by a 1x1
/// convolution over all channels.
struct DenoiserArch {
    std::size_t depth = 32;

    std::size_t dilation_of(std::size_t i) const { return (i % 10) + 1; }

    /// Exact parameter count, biases included.
    std::uint64_t parameter_count() const {
        const std::uint64_t d = depth;
        return 9 * d * (d + 1) / 2 + d // dilated conv weights and biases
               + (d + 1) + 1;          // final 1x1 over input + all outputs
    }
};

/// Sinogram-to-image end-to-end model: two fully connected layers mapping
/// the flattened sinogram to image size, then two 3x3 convolutions and a
/// 1x1 output convolution.
struct AutomapArch {
    std::size_t n_detectors = 64;
    std::size_t n_angles = 16;
    std::size_t image_side = 64;
    std::size_t conv_channels = 64;

    /// Dense weight count n_a*n_d*N^2 + N^4; this dominates the model and is
    /// the headline figure for memory estimates.
    std::uint64_t dense_parameter_count() const {
        const std::uint64_t nd = n_detectors, na = n_angles, N = image_side;
        return na * nd * N * N + N * N * N * N;
    }

    std::uint64_t total_parameter_count() const {
        const std::uint64_t N = image_side, C = conv_channels;
        return dense_parameter_count() + 2 * N * N        // dense biases
               + 9 * C + C                                // conv1 1->C
               + 9 * C * C + C                            // conv2 C->C
               + C + 1;                                   // output 1x1 C->1
    }
};

struct ParamEstimate {
    std::uint64_t param_count = 0;   // headline count
    std::uint64_t total_params = 0;  // everything, biases included
    std::uint64_t memory_bytes = 0;  // param_count * bytes_per_param
};

inline ParamEstimate estimate_params(const AutomapArch& arch, std::uint64_t bytes_per_param = 4) {
    ParamEstimate e;
    e.param_count = arch.dense_parameter_count();
    e.total_params = arch.total_parameter_count();
    e.memory_bytes = e.param_count * bytes_per_param;
    return e;
}

inline ParamEstimate estimate_params(const DenoiserArch& arch, std::uint64_t bytes_per_param = 4) {
    ParamEstimate e;
    e.param_count = arch.parameter_count();
    e.total_params = e.param_count;
    e.memory_bytes = e.param_count * bytes_per_param;
    return e;
}

template <typename T = float>
nn::Network<T> build_denoiser(const DenoiserArch& arch, std::uint64_t seed) {
    require(arch.depth >= 1, "build_denoiser: depth must be >= 1");
    std::mt19937_64 rng(seed);
    nn::Network<T> net;
    std::vector<std::int32_t> feature_nodes{-1}; // network input plus each activated output

    for (std::size_t i = 0; i < arch.depth; ++i) {
        std::int32_t conv_src = -1;
        if (feature_nodes.size() > 1) {
            nn::Layer<T> cat;
            cat.kind = nn::LayerKind::Concat;
            cat.inputs = feature_nodes;
            net.layers.push_back(cat);
            conv_src = static_cast<std::int32_t>(net.layers.size() - 1);
        }
        nn::Layer<T> conv;
        conv.kind = nn::LayerKind::Conv2D;
        conv.inputs = {conv_src};
        conv.in_ch = feature_nodes.size();
        conv.out_ch = 1;
        conv.kernel = 3;
        conv.dilation = arch.dilation_of(i);
        nn::init_layer_params(conv, nn::InitKind::HeUniform, rng);
        net.layers.push_back(conv);

        nn::Layer<T> relu;
        relu.kind = nn::LayerKind::ReLU;
        relu.inputs = {static_cast<std::int32_t>(net.layers.size() - 1)};
        net.layers.push_back(relu);
        feature_nodes.push_back(static_cast<std::int32_t>(net.layers.size() - 1));
    }

    nn::Layer<T> cat;
    cat.kind = nn::LayerKind::Concat;
    cat.inputs = feature_nodes;
    net.layers.push_back(cat);

    nn::Layer<T> head;
    head.kind = nn::LayerKind::Conv2D;
    head.inputs = {static_cast<std::int32_t>(net.layers.size() - 1)};
    head.in_ch = feature_nodes.size();
    head.out_ch = 1;
    head.kernel = 1;
    head.dilation = 1;
    nn::init_layer_params(head, nn::InitKind::GlorotUniform, rng);
    net.layers.push_back(head);

    net.validate_wiring();
    return net;
}

template <typename T = float>
nn::Network<T> build_automap(const AutomapArch& arch, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    nn::Network<T> net;
    const std::size_t N = arch.image_side;
    const std::size_t C = arch.conv_channels;

    auto relu_after = [&net]() {
        nn::Layer<T> relu;
        relu.kind = nn::LayerKind::ReLU;
        relu.inputs = {static_cast<std::int32_t>(net.layers.size() - 1)};
        net.layers.push_back(relu);
    };

    nn::Layer<T> fc1;
    fc1.kind = nn::LayerKind::Dense;
    fc1.inputs = {-1};
    fc1.in_features = arch.n_angles * arch.n_detectors;
    fc1.out_features = N * N;
    nn::init_layer_params(fc1, nn::InitKind::HeUniform, rng);
    net.layers.push_back(fc1);
    relu_after();

    nn::Layer<T> fc2;
    fc2.kind = nn::LayerKind::Dense;
    fc2.inputs = {static_cast<std::int32_t>(net.layers.size() - 1)};
    fc2.in_features = N * N;
    fc2.out_features = N * N;
    fc2.dense_out_chw = {1, N, N};
    nn::init_layer_params(fc2, nn::InitKind::HeUniform, rng);
    net.layers.push_back(fc2);
    relu_after();

    nn::Layer<T> conv1;
    conv1.kind = nn::LayerKind::Conv2D;
    conv1.inputs = {static_cast<std::int32_t>(net.layers.size() - 1)};
    conv1.in_ch = 1;
    conv1.out_ch = C;
    conv1.kernel = 3;
    nn::init_layer_params(conv1, nn::InitKind::HeUniform, rng);
    net.layers.push_back(conv1);
    relu_after();

    nn::Layer<T> conv2;
    conv2.kind = nn::LayerKind::Conv2D;
    conv2.inputs = {static_cast<std::int32_t>(net.layers.size() - 1)};
    conv2.in_ch = C;
    conv2.out_ch = C;
    conv2.kernel = 3;
    nn::init_layer_params(conv2, nn::InitKind::HeUniform, rng);
    net.layers.push_back(conv2);
    relu_after();

    nn::Layer<T> head;
    head.kind = nn::LayerKind::Conv2D;
    head.inputs = {static_cast<std::int32_t>(net.layers.size() - 1)};
    head.in_ch = C;
    head.out_ch = 1;
    head.kernel = 1;
    nn::init_layer_params(head, nn::InitKind::GlorotUniform, rng);
    net.layers.push_back(head);

    net.validate_wiring();
    return net;
}

} // namespace ctkit
