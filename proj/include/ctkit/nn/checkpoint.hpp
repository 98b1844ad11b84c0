#pragma once

#include <cstdint>
#include <string>

#include "ctkit/io.hpp"
#include "ctkit/nn/network.hpp"

namespace ctkit::nn {

// CTN1 model container, little-endian throughout:
//   "CTN1", u32 layer_count,
//   per layer: u32 kind, u32 attr_len, attr bytes,
//              then each parameter tensor as u32 rank, u32 dims..., f32 data.
// Attr bytes: u32 n_inputs, n_inputs x i32 source indices, kind extras
// (Dense: in/out features + optional output CHW; Conv2D: channels, kernel,
// dilation; LeakyReLU: f32 slope; ELU: f32 alpha). Parameters are written as
// float32 regardless of the in-memory scalar type.

namespace detail {

inline void put_i32(std::string& buf, std::int32_t v) {
    ctkit::detail::put_u32(buf, static_cast<std::uint32_t>(v));
}

template <typename T>
void put_tensor(std::string& buf, const Tensor<T>& t) {
    ctkit::detail::put_u32(buf, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape) ctkit::detail::put_u32(buf, static_cast<std::uint32_t>(d));
    for (T v : t.data) ctkit::detail::put_f32(buf, static_cast<float>(v));
}

template <typename T>
Tensor<T> get_tensor(const std::string& buf, std::size_t& off) {
    const std::uint32_t rank = ctkit::detail::get_u32(buf, off);
    off += 4;
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) {
        d = ctkit::detail::get_u32(buf, off);
        off += 4;
    }
    Tensor<T> t(shape);
    for (auto& v : t.data) {
        v = static_cast<T>(ctkit::detail::get_f32(buf, off));
        off += 4;
    }
    return t;
}

} // namespace detail

template <typename T>
void save_network(const std::string& path, const Network<T>& net) {
    std::string buf = "CTN1";
    ctkit::detail::put_u32(buf, static_cast<std::uint32_t>(net.layers.size()));
    for (const auto& l : net.layers) {
        ctkit::detail::put_u32(buf, static_cast<std::uint32_t>(l.kind));
        std::string attrs;
        ctkit::detail::put_u32(attrs, static_cast<std::uint32_t>(l.inputs.size()));
        for (std::int32_t src : l.inputs) detail::put_i32(attrs, src);
        switch (l.kind) {
            case LayerKind::Dense:
                ctkit::detail::put_u32(attrs, static_cast<std::uint32_t>(l.in_features));
                ctkit::detail::put_u32(attrs, static_cast<std::uint32_t>(l.out_features));
                for (std::size_t d : l.dense_out_chw)
                    ctkit::detail::put_u32(attrs, static_cast<std::uint32_t>(d));
                break;
            case LayerKind::Conv2D:
                ctkit::detail::put_u32(attrs, static_cast<std::uint32_t>(l.in_ch));
                ctkit::detail::put_u32(attrs, static_cast<std::uint32_t>(l.out_ch));
                ctkit::detail::put_u32(attrs, static_cast<std::uint32_t>(l.kernel));
                ctkit::detail::put_u32(attrs, static_cast<std::uint32_t>(l.dilation));
                break;
            case LayerKind::LeakyReLU:
                ctkit::detail::put_f32(attrs, static_cast<float>(l.leaky_slope));
                break;
            case LayerKind::ELU:
                ctkit::detail::put_f32(attrs, static_cast<float>(l.elu_alpha));
                break;
            default:
                break;
        }
        ctkit::detail::put_u32(buf, static_cast<std::uint32_t>(attrs.size()));
        buf += attrs;
        if (l.has_params()) {
            detail::put_tensor(buf, l.weight);
            detail::put_tensor(buf, l.bias);
        }
    }
    ctkit::detail::write_file_bytes(path, buf);
}

template <typename T>
Network<T> load_network(const std::string& path) {
    const std::string buf = ctkit::detail::read_file_bytes(path);
    require(buf.size() >= 8 && buf.compare(0, 4, "CTN1") == 0,
            "load_network: not a CTN1 file: " + path);
    std::size_t off = 4;
    const std::uint32_t n_layers = ctkit::detail::get_u32(buf, off);
    off += 4;

    Network<T> net;
    net.layers.resize(n_layers);
    for (auto& l : net.layers) {
        require(off + 8 <= buf.size(), "load_network: truncated file: " + path);
        l.kind = static_cast<LayerKind>(ctkit::detail::get_u32(buf, off));
        off += 4;
        const std::uint32_t attr_len = ctkit::detail::get_u32(buf, off);
        off += 4;
        require(off + attr_len <= buf.size(), "load_network: truncated attrs: " + path);
        std::size_t a = off;
        const std::uint32_t n_inputs = ctkit::detail::get_u32(buf, a);
        a += 4;
        l.inputs.resize(n_inputs);
        for (auto& src : l.inputs) {
            src = static_cast<std::int32_t>(ctkit::detail::get_u32(buf, a));
            a += 4;
        }
        switch (l.kind) {
            case LayerKind::Dense:
                l.in_features = ctkit::detail::get_u32(buf, a);
                l.out_features = ctkit::detail::get_u32(buf, a + 4);
                for (std::size_t i = 0; i < 3; ++i)
                    l.dense_out_chw[i] = ctkit::detail::get_u32(buf, a + 8 + 4 * i);
                break;
            case LayerKind::Conv2D:
                l.in_ch = ctkit::detail::get_u32(buf, a);
                l.out_ch = ctkit::detail::get_u32(buf, a + 4);
                l.kernel = ctkit::detail::get_u32(buf, a + 8);
                l.dilation = ctkit::detail::get_u32(buf, a + 12);
                break;
            case LayerKind::LeakyReLU:
                l.leaky_slope = ctkit::detail::get_f32(buf, a);
                break;
            case LayerKind::ELU:
                l.elu_alpha = ctkit::detail::get_f32(buf, a);
                break;
            default:
                break;
        }
        off += attr_len;
        if (l.has_params()) {
            l.weight = detail::get_tensor<T>(buf, off);
            l.bias = detail::get_tensor<T>(buf, off);
            l.grad_weight = Tensor<T>(l.weight.shape);
            l.grad_bias = Tensor<T>(l.bias.shape);
        }
    }
    require(off == buf.size(), "load_network: trailing bytes: " + path);
    net.validate_wiring();
    return net;
}

} // namespace ctkit::nn
