#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ctkit/common.hpp"
#include "ctkit/nn/tensor.hpp"

namespace ctkit::nn {

/// Adaptive-moment optimizer state: per-parameter first/second moment
/// tensors and a shared step counter. `paper_bias` switches the bias
/// correction from the standard 1-beta^n denominators to constant 1-beta
/// (both coincide at n = 1).
template <typename T>
struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    bool paper_bias = false;

    std::uint64_t n = 0;
    std::vector<Tensor<T>> m;
    std::vector<Tensor<T>> v;

    void attach(const std::vector<Tensor<T>*>& params) {
        m.clear();
        v.clear();
        for (const Tensor<T>* p : params) {
            m.emplace_back(p->shape);
            v.emplace_back(p->shape);
        }
        n = 0;
    }

    /// One update: n increments first, then per element
    ///   m <- b1*m + (1-b1)*g,  v <- b2*v + (1-b2)*g^2,
    ///   theta <- theta - lr * m_hat / sqrt(v_hat + eps)   (eps inside the root).
    void step(const std::vector<Tensor<T>*>& params, const std::vector<const Tensor<T>*>& grads) {
        require(params.size() == grads.size(), "adam_step: params/grads size mismatch");
        require(params.size() == m.size(), "adam_step: state not attached to these parameters");
        n += 1;
        const double c1 = paper_bias ? 1.0 - beta1 : 1.0 - std::pow(beta1, static_cast<double>(n));
        const double c2 = paper_bias ? 1.0 - beta2 : 1.0 - std::pow(beta2, static_cast<double>(n));
        for (std::size_t p = 0; p < params.size(); ++p) {
            Tensor<T>& theta = *params[p];
            const Tensor<T>& g = *grads[p];
            require(theta.numel() == g.numel() && theta.numel() == m[p].numel(),
                    "adam_step: tensor shape mismatch");
            for (std::size_t i = 0; i < theta.numel(); ++i) {
                const double gi = static_cast<double>(g.data[i]);
                const double mi = beta1 * static_cast<double>(m[p].data[i]) + (1.0 - beta1) * gi;
                const double vi = beta2 * static_cast<double>(v[p].data[i]) + (1.0 - beta2) * gi * gi;
                m[p].data[i] = static_cast<T>(mi);
                v[p].data[i] = static_cast<T>(vi);
                const double m_hat = mi / c1;
                const double v_hat = vi / c2;
                theta.data[i] = static_cast<T>(static_cast<double>(theta.data[i]) -
                                               lr * m_hat / std::sqrt(v_hat + eps));
            }
        }
    }
};

/// Plain gradient descent: theta <- theta - lr * g.
template <typename T>
void sgd_step(const std::vector<Tensor<T>*>& params, const std::vector<const Tensor<T>*>& grads,
              double lr) {
    require(params.size() == grads.size(), "sgd_step: params/grads size mismatch");
    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor<T>& theta = *params[p];
        const Tensor<T>& g = *grads[p];
        require(theta.numel() == g.numel(), "sgd_step: tensor shape mismatch");
        for (std::size_t i = 0; i < theta.numel(); ++i)
            theta.data[i] = static_cast<T>(static_cast<double>(theta.data[i]) -
                                           lr * static_cast<double>(g.data[i]));
    }
}

} // namespace ctkit::nn
