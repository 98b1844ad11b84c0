#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ctkit/common.hpp"
#include "ctkit/nn/tensor.hpp"
#include "ctkit/parallel.hpp"

namespace ctkit::nn {

enum class LayerKind : std::uint32_t {
    Dense = 1,
    Conv2D = 2,
    ReLU = 3,
    LeakyReLU = 4,
    ELU = 5,
    Concat = 6,
};

inline const char* kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Dense: return "Dense";
        case LayerKind::Conv2D: return "Conv2D";
        case LayerKind::ReLU: return "ReLU";
        case LayerKind::LeakyReLU: return "LeakyReLU";
        case LayerKind::ELU: return "ELU";
        case LayerKind::Concat: return "Concat";
    }
    return "?";
}

/// One network node. `inputs` holds indices of earlier layers (-1 is the
/// network input); all kinds take a single input except Concat, which joins
/// any number of earlier outputs along the channel axis.
template <typename T>
struct Layer {
    LayerKind kind = LayerKind::ReLU;
    std::vector<std::int32_t> inputs{-1};

    // Dense
    std::size_t in_features = 0;
    std::size_t out_features = 0;
    std::array<std::size_t, 3> dense_out_chw{0, 0, 0}; // optional (C,H,W) reshape of the output

    // Conv2D: stride 1, zero "same" padding, square kernel (1 or 3)
    std::size_t in_ch = 0;
    std::size_t out_ch = 0;
    std::size_t kernel = 1;
    std::size_t dilation = 1;

    double leaky_slope = 0.01;
    double elu_alpha = 1.0;

    Tensor<T> weight, bias;
    Tensor<T> grad_weight, grad_bias;

    bool has_params() const { return kind == LayerKind::Dense || kind == LayerKind::Conv2D; }
};

enum class InitKind { HeUniform, GlorotUniform };

/// Seeded fan-based uniform init; He for parameters feeding ReLU-family
/// activations, Glorot otherwise. Biases start at zero.
template <typename T>
void init_layer_params(Layer<T>& layer, InitKind init, std::mt19937_64& rng) {
    if (!layer.has_params()) return;
    double fan_in, fan_out;
    if (layer.kind == LayerKind::Dense) {
        fan_in = static_cast<double>(layer.in_features);
        fan_out = static_cast<double>(layer.out_features);
        layer.weight = Tensor<T>({layer.out_features, layer.in_features});
        layer.bias = Tensor<T>({layer.out_features});
    } else {
        fan_in = static_cast<double>(layer.in_ch * layer.kernel * layer.kernel);
        fan_out = static_cast<double>(layer.out_ch * layer.kernel * layer.kernel);
        layer.weight = Tensor<T>({layer.out_ch, layer.in_ch, layer.kernel, layer.kernel});
        layer.bias = Tensor<T>({layer.out_ch});
    }
    const double limit = init == InitKind::HeUniform ? std::sqrt(6.0 / fan_in)
                                                     : std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (T& w : layer.weight.data) w = static_cast<T>(dist(rng));
    layer.grad_weight = Tensor<T>(layer.weight.shape);
    layer.grad_bias = Tensor<T>(layer.bias.shape);
}

namespace detail {

template <typename T>
[[noreturn]] void layer_error(std::size_t index, const Layer<T>& layer, const std::string& msg) {
    throw invalid_input("layer " + std::to_string(index) + " (" + kind_name(layer.kind) + "): " +
                        msg);
}

// ---- Dense ------------------------------------------------------------------

template <typename T>
Tensor<T> dense_forward(const Layer<T>& l, const Tensor<T>& in, std::size_t index) {
    const std::size_t batch = in.dim(0);
    if (batch == 0 || in.numel() % batch != 0 || in.numel() / batch != l.in_features)
        layer_error(index, l,
                    "expected " + std::to_string(l.in_features) + " features per sample, got " +
                        Tensor<T>::shape_string(in.shape));
    std::vector<std::size_t> out_shape;
    if (l.dense_out_chw[0] != 0)
        out_shape = {batch, l.dense_out_chw[0], l.dense_out_chw[1], l.dense_out_chw[2]};
    else
        out_shape = {batch, l.out_features};
    Tensor<T> out(out_shape);
    const std::size_t nf = l.in_features;
    parallel_for(batch * l.out_features, [&](std::size_t idx) {
        const std::size_t b = idx / l.out_features;
        const std::size_t o = idx % l.out_features;
        const T* x = in.data.data() + b * nf;
        const T* w = l.weight.data.data() + o * nf;
        T acc = l.bias.data[o];
        for (std::size_t i = 0; i < nf; ++i) acc += w[i] * x[i];
        out.data[idx] = acc;
    });
    return out;
}

template <typename T>
Tensor<T> dense_backward(Layer<T>& l, const Tensor<T>& in, const Tensor<T>& dout) {
    const std::size_t batch = in.dim(0);
    const std::size_t nf = l.in_features;
    const std::size_t no = l.out_features;

    Tensor<T> din(in.shape);
    parallel_for(batch * nf, [&](std::size_t idx) {
        const std::size_t b = idx / nf;
        const std::size_t i = idx % nf;
        T acc = T(0);
        for (std::size_t o = 0; o < no; ++o)
            acc += l.weight.data[o * nf + i] * dout.data[b * no + o];
        din.data[idx] = acc;
    });

    parallel_for(no * nf, [&](std::size_t idx) {
        const std::size_t o = idx / nf;
        const std::size_t i = idx % nf;
        T acc = T(0);
        for (std::size_t b = 0; b < batch; ++b)
            acc += dout.data[b * no + o] * in.data[b * nf + i];
        l.grad_weight.data[idx] += acc;
    });
    for (std::size_t o = 0; o < no; ++o) {
        T acc = T(0);
        for (std::size_t b = 0; b < batch; ++b) acc += dout.data[b * no + o];
        l.grad_bias.data[o] += acc;
    }
    return din;
}

// ---- Conv2D -----------------------------------------------------------------

template <typename T>
Tensor<T> conv_forward(const Layer<T>& l, const Tensor<T>& in, std::size_t index) {
    if (in.rank() != 4 || in.dim(1) != l.in_ch)
        layer_error(index, l,
                    "expected (B," + std::to_string(l.in_ch) + ",H,W) input, got " +
                        Tensor<T>::shape_string(in.shape));
    const std::size_t B = in.dim(0), H = in.dim(2), W = in.dim(3);
    const long pad = static_cast<long>(l.dilation * (l.kernel - 1) / 2);
    const long d = static_cast<long>(l.dilation);
    const long k = static_cast<long>(l.kernel);
    Tensor<T> out({B, l.out_ch, H, W});

    parallel_for(B * l.out_ch * H, [&](std::size_t idx) {
        const std::size_t b = idx / (l.out_ch * H);
        const std::size_t oc = (idx / H) % l.out_ch;
        const long y = static_cast<long>(idx % H);
        T* out_row = out.data.data() + ((b * l.out_ch + oc) * H + y) * W;
        for (std::size_t x = 0; x < W; ++x) out_row[x] = l.bias.data[oc];
        for (std::size_t ic = 0; ic < l.in_ch; ++ic) {
            for (long ky = 0; ky < k; ++ky) {
                const long iy = y + ky * d - pad;
                if (iy < 0 || iy >= static_cast<long>(H)) continue;
                const T* in_row = in.data.data() + ((b * l.in_ch + ic) * H + iy) * W;
                for (long kx = 0; kx < k; ++kx) {
                    const long off = kx * d - pad;
                    const T w = l.weight.data[((oc * l.in_ch + ic) * l.kernel + ky) * l.kernel + kx];
                    const long x_lo = std::max(0L, -off);
                    const long x_hi = std::min(static_cast<long>(W), static_cast<long>(W) - off);
                    for (long x = x_lo; x < x_hi; ++x) out_row[x] += w * in_row[x + off];
                }
            }
        }
    });
    return out;
}

template <typename T>
Tensor<T> conv_backward(Layer<T>& l, const Tensor<T>& in, const Tensor<T>& dout) {
    const std::size_t B = in.dim(0), H = in.dim(2), W = in.dim(3);
    const long pad = static_cast<long>(l.dilation * (l.kernel - 1) / 2);
    const long d = static_cast<long>(l.dilation);
    const long k = static_cast<long>(l.kernel);

    Tensor<T> din(in.shape);
    parallel_for(B * l.in_ch * H, [&](std::size_t idx) {
        const std::size_t b = idx / (l.in_ch * H);
        const std::size_t ic = (idx / H) % l.in_ch;
        const long iy = static_cast<long>(idx % H);
        T* din_row = din.data.data() + ((b * l.in_ch + ic) * H + iy) * W;
        for (std::size_t oc = 0; oc < l.out_ch; ++oc) {
            for (long ky = 0; ky < k; ++ky) {
                const long oy = iy - ky * d + pad;
                if (oy < 0 || oy >= static_cast<long>(H)) continue;
                const T* dout_row = dout.data.data() + ((b * l.out_ch + oc) * H + oy) * W;
                for (long kx = 0; kx < k; ++kx) {
                    const long off = kx * d - pad; // ox = ix - off
                    const T w = l.weight.data[((oc * l.in_ch + ic) * l.kernel + ky) * l.kernel + kx];
                    const long x_lo = std::max(0L, off);
                    const long x_hi = std::min(static_cast<long>(W), static_cast<long>(W) + off);
                    for (long ix = x_lo; ix < x_hi; ++ix) din_row[ix] += w * dout_row[ix - off];
                }
            }
        }
    });

    // weight gradients: one gather per weight element, deterministic under
    // any thread count
    parallel_for(l.out_ch * l.in_ch * l.kernel * l.kernel, [&](std::size_t widx) {
        const std::size_t kx = widx % l.kernel;
        const std::size_t ky = (widx / l.kernel) % l.kernel;
        const std::size_t ic = (widx / (l.kernel * l.kernel)) % l.in_ch;
        const std::size_t oc = widx / (l.kernel * l.kernel * l.in_ch);
        const long oy_shift = static_cast<long>(ky) * d - pad;
        const long ox_shift = static_cast<long>(kx) * d - pad;
        T acc = T(0);
        for (std::size_t b = 0; b < B; ++b) {
            for (long y = 0; y < static_cast<long>(H); ++y) {
                const long iy = y + oy_shift;
                if (iy < 0 || iy >= static_cast<long>(H)) continue;
                const T* dout_row = dout.data.data() + ((b * l.out_ch + oc) * H + y) * W;
                const T* in_row = in.data.data() + ((b * l.in_ch + ic) * H + iy) * W;
                const long x_lo = std::max(0L, -ox_shift);
                const long x_hi = std::min(static_cast<long>(W), static_cast<long>(W) - ox_shift);
                for (long x = x_lo; x < x_hi; ++x) acc += dout_row[x] * in_row[x + ox_shift];
            }
        }
        l.grad_weight.data[widx] += acc;
    });

    for (std::size_t oc = 0; oc < l.out_ch; ++oc) {
        T acc = T(0);
        for (std::size_t b = 0; b < B; ++b) {
            const T* dout_plane = dout.data.data() + (b * l.out_ch + oc) * H * W;
            for (std::size_t i = 0; i < H * W; ++i) acc += dout_plane[i];
        }
        l.grad_bias.data[oc] += acc;
    }
    return din;
}

// ---- activations --------------------------------------------------------
// Derivatives at exactly zero take the negative-branch value.

template <typename T>
Tensor<T> activation_forward(const Layer<T>& l, const Tensor<T>& in) {
    Tensor<T> out(in.shape);
    switch (l.kind) {
        case LayerKind::ReLU:
            for (std::size_t i = 0; i < in.numel(); ++i)
                out.data[i] = in.data[i] > T(0) ? in.data[i] : T(0);
            break;
        case LayerKind::LeakyReLU: {
            const T a = static_cast<T>(l.leaky_slope);
            for (std::size_t i = 0; i < in.numel(); ++i)
                out.data[i] = in.data[i] > T(0) ? in.data[i] : a * in.data[i];
            break;
        }
        case LayerKind::ELU: {
            const T a = static_cast<T>(l.elu_alpha);
            for (std::size_t i = 0; i < in.numel(); ++i)
                out.data[i] = in.data[i] > T(0)
                                  ? in.data[i]
                                  : a * (std::exp(static_cast<double>(in.data[i])) - 1.0);
            break;
        }
        default: break;
    }
    return out;
}

template <typename T>
Tensor<T> activation_backward(const Layer<T>& l, const Tensor<T>& in, const Tensor<T>& dout) {
    Tensor<T> din(in.shape);
    switch (l.kind) {
        case LayerKind::ReLU:
            for (std::size_t i = 0; i < in.numel(); ++i)
                din.data[i] = in.data[i] > T(0) ? dout.data[i] : T(0);
            break;
        case LayerKind::LeakyReLU: {
            const T a = static_cast<T>(l.leaky_slope);
            for (std::size_t i = 0; i < in.numel(); ++i)
                din.data[i] = in.data[i] > T(0) ? dout.data[i] : a * dout.data[i];
            break;
        }
        case LayerKind::ELU: {
            const T a = static_cast<T>(l.elu_alpha);
            for (std::size_t i = 0; i < in.numel(); ++i)
                din.data[i] = in.data[i] > T(0)
                                  ? dout.data[i]
                                  : static_cast<T>(a * std::exp(static_cast<double>(in.data[i]))) *
                                        dout.data[i];
            break;
        }
        default: break;
    }
    return din;
}

} // namespace detail

} // namespace ctkit::nn
