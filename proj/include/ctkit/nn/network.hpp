#pragma once

#include <utility>
#include <vector>

#include "ctkit/nn/layers.hpp"
#include "ctkit/nn/tensor.hpp"

namespace ctkit::nn {

namespace detail {

inline bool& finite_check_flag() {
    static bool enabled = false;
    return enabled;
}

} // namespace detail

/// Debug hook: when enabled, every node output and gradient is checked for
/// NaN/Inf and a failure names the offending layer.
inline void set_debug_check_finite(bool enabled) { detail::finite_check_flag() = enabled; }
inline bool debug_check_finite() { return detail::finite_check_flag(); }

/// Feed-forward DAG evaluated in layer-list order; backward walks the exact
/// reverse order. Forward caches every node output, which backward consumes.
template <typename T>
struct Network {
    std::vector<Layer<T>> layers;

    // forward cache
    Tensor<T> input_cache;
    std::vector<Tensor<T>> node_out;
    bool cached = false;

    void validate_wiring() const {
        for (std::size_t k = 0; k < layers.size(); ++k) {
            const auto& l = layers[k];
            require(!l.inputs.empty(), "layer " + std::to_string(k) + ": no input wired");
            if (l.kind != LayerKind::Concat)
                require(l.inputs.size() == 1,
                        "layer " + std::to_string(k) + ": single-input kind with multiple inputs");
            for (std::int32_t src : l.inputs)
                require(src >= -1 && src < static_cast<std::int32_t>(k),
                        "layer " + std::to_string(k) + ": input must reference an earlier layer");
        }
    }

    const Tensor<T>& source(std::int32_t idx) const {
        return idx < 0 ? input_cache : node_out[static_cast<std::size_t>(idx)];
    }

    Tensor<T> forward(const Tensor<T>& input) {
        validate_wiring();
        require(!layers.empty(), "Network::forward: empty network");
        input_cache = input;
        node_out.assign(layers.size(), Tensor<T>{});
        for (std::size_t k = 0; k < layers.size(); ++k) {
            auto& l = layers[k];
            switch (l.kind) {
                case LayerKind::Dense:
                    node_out[k] = detail::dense_forward(l, source(l.inputs[0]), k);
                    break;
                case LayerKind::Conv2D:
                    node_out[k] = detail::conv_forward(l, source(l.inputs[0]), k);
                    break;
                case LayerKind::Concat:
                    node_out[k] = concat_forward(k);
                    break;
                default:
                    node_out[k] = detail::activation_forward(l, source(l.inputs[0]));
                    break;
            }
            if (debug_check_finite() && !node_out[k].all_finite())
                throw std::runtime_error("layer " + std::to_string(k) + " (" +
                                         kind_name(l.kind) + "): non-finite activation");
        }
        cached = true;
        return node_out.back();
    }

    /// Fills every layer's parameter gradients (accumulating) and returns the
    /// gradient with respect to the network input.
    Tensor<T> backward(const Tensor<T>& output_grad) {
        require(cached, "Network::backward: no forward cache; run forward first");
        require(output_grad.same_shape(node_out.back()),
                "Network::backward: loss gradient shape mismatch");

        std::vector<Tensor<T>> node_grad(layers.size());
        Tensor<T> input_grad(input_cache.shape);
        node_grad.back() = output_grad;

        auto scatter = [&](std::int32_t src, Tensor<T>&& g) {
            if (src < 0) {
                for (std::size_t i = 0; i < input_grad.numel(); ++i) input_grad.data[i] += g.data[i];
                return;
            }
            auto& slot = node_grad[static_cast<std::size_t>(src)];
            if (slot.numel() == 0) {
                slot = std::move(g);
            } else {
                for (std::size_t i = 0; i < slot.numel(); ++i) slot.data[i] += g.data[i];
            }
        };

        for (std::size_t k = layers.size(); k-- > 0;) {
            auto& l = layers[k];
            Tensor<T>& dout = node_grad[k];
            if (dout.numel() == 0) continue; // node feeds nothing downstream
            if (debug_check_finite() && !dout.all_finite())
                throw std::runtime_error("layer " + std::to_string(k) + " (" +
                                         kind_name(l.kind) + "): non-finite gradient");
            switch (l.kind) {
                case LayerKind::Dense:
                    scatter(l.inputs[0], detail::dense_backward(l, source(l.inputs[0]), dout));
                    break;
                case LayerKind::Conv2D:
                    scatter(l.inputs[0], detail::conv_backward(l, source(l.inputs[0]), dout));
                    break;
                case LayerKind::Concat:
                    concat_backward(k, dout, scatter);
                    break;
                default:
                    scatter(l.inputs[0],
                            detail::activation_backward(l, source(l.inputs[0]), dout));
                    break;
            }
        }
        return input_grad;
    }

    void zero_grads() {
        for (auto& l : layers) {
            for (T& g : l.grad_weight.data) g = T(0);
            for (T& g : l.grad_bias.data) g = T(0);
        }
    }

    std::vector<Tensor<T>*> param_tensors() {
        std::vector<Tensor<T>*> out;
        for (auto& l : layers)
            if (l.has_params()) {
                out.push_back(&l.weight);
                out.push_back(&l.bias);
            }
        return out;
    }

    std::vector<const Tensor<T>*> grad_tensors() const {
        std::vector<const Tensor<T>*> out;
        for (const auto& l : layers)
            if (l.has_params()) {
                out.push_back(&l.grad_weight);
                out.push_back(&l.grad_bias);
            }
        return out;
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers)
            if (l.has_params()) n += l.weight.numel() + l.bias.numel();
        return n;
    }

private:
    Tensor<T> concat_forward(std::size_t k) {
        const auto& l = layers[k];
        const Tensor<T>& first = source(l.inputs[0]);
        if (first.rank() != 4)
            detail::layer_error(k, l, "Concat expects (B,C,H,W) inputs");
        const std::size_t B = first.dim(0), H = first.dim(2), W = first.dim(3);
        std::size_t total_ch = 0;
        for (std::int32_t src : l.inputs) {
            const Tensor<T>& t = source(src);
            if (t.rank() != 4 || t.dim(0) != B || t.dim(2) != H || t.dim(3) != W)
                detail::layer_error(k, l, "Concat inputs disagree on batch or spatial shape");
            total_ch += t.dim(1);
        }
        Tensor<T> out({B, total_ch, H, W});
        const std::size_t plane = H * W;
        for (std::size_t b = 0; b < B; ++b) {
            std::size_t ch_off = 0;
            for (std::int32_t src : l.inputs) {
                const Tensor<T>& t = source(src);
                const std::size_t c = t.dim(1);
                std::copy_n(t.data.data() + b * c * plane, c * plane,
                            out.data.data() + (b * total_ch + ch_off) * plane);
                ch_off += c;
            }
        }
        return out;
    }

    template <typename Scatter>
    void concat_backward(std::size_t k, const Tensor<T>& dout, Scatter&& scatter) {
        const auto& l = layers[k];
        const std::size_t B = dout.dim(0), total_ch = dout.dim(1);
        const std::size_t plane = dout.dim(2) * dout.dim(3);
        std::size_t ch_off = 0;
        for (std::int32_t src : l.inputs) {
            const Tensor<T>& t = source(src);
            const std::size_t c = t.dim(1);
            Tensor<T> g(t.shape);
            for (std::size_t b = 0; b < B; ++b)
                std::copy_n(dout.data.data() + (b * total_ch + ch_off) * plane, c * plane,
                            g.data.data() + b * c * plane);
            scatter(src, std::move(g));
            ch_off += c;
        }
    }
};

/// Mean-squared-error over all elements; the normalizer covers batch,
/// channel and spatial dimensions. Loss accumulates in 64-bit regardless
/// of T. Returns the loss and d(loss)/d(output).
template <typename T>
std::pair<double, Tensor<T>> mse_loss(const Tensor<T>& output, const Tensor<T>& target) {
    require(output.same_shape(target), "mse_loss: shape mismatch " +
                                           Tensor<T>::shape_string(output.shape) + " vs " +
                                           Tensor<T>::shape_string(target.shape));
    const double inv_n = 1.0 / static_cast<double>(output.numel());
    double loss = 0.0;
    Tensor<T> grad(output.shape);
    for (std::size_t i = 0; i < output.numel(); ++i) {
        const double diff = static_cast<double>(output.data[i]) - static_cast<double>(target.data[i]);
        loss += diff * diff;
        grad.data[i] = static_cast<T>(2.0 * diff * inv_n);
    }
    return {loss * inv_n, std::move(grad)};
}

} // namespace ctkit::nn
