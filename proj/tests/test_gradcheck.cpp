#include <catch2/catch_amalgamated.hpp>

#include "gradcheck_support.hpp"

using namespace ctkit::nn;
using gradcheck::checked_run;

namespace {

template <typename T>
Layer<T> make_conv(std::size_t in_ch, std::size_t out_ch, std::size_t kernel, std::size_t dilation,
                   std::int32_t input, std::mt19937_64& rng) {
    Layer<T> l;
    l.kind = LayerKind::Conv2D;
    l.inputs = {input};
    l.in_ch = in_ch;
    l.out_ch = out_ch;
    l.kernel = kernel;
    l.dilation = dilation;
    init_layer_params(l, InitKind::GlorotUniform, rng);
    return l;
}

template <typename T>
Layer<T> make_dense(std::size_t in_f, std::size_t out_f, std::int32_t input,
                    std::mt19937_64& rng) {
    Layer<T> l;
    l.kind = LayerKind::Dense;
    l.inputs = {input};
    l.in_features = in_f;
    l.out_features = out_f;
    init_layer_params(l, InitKind::GlorotUniform, rng);
    return l;
}

template <typename T>
Layer<T> make_activation(LayerKind kind, std::int32_t input) {
    Layer<T> l;
    l.kind = kind;
    l.inputs = {input};
    return l;
}

} // namespace

TEST_CASE("dense stack with ReLU and LeakyReLU passes finite differences") {
    std::mt19937_64 rng(1);
    Network<double> net;
    net.layers.push_back(make_dense<double>(6, 5, -1, rng));
    net.layers.push_back(make_activation<double>(LayerKind::ReLU, 0));
    net.layers.push_back(make_dense<double>(5, 4, 1, rng));
    net.layers.push_back(make_activation<double>(LayerKind::LeakyReLU, 2));
    net.layers.push_back(make_dense<double>(4, 2, 3, rng));

    auto result = checked_run(net, {2, 6}, 100);
    CAPTURE(result.max_rel_err, result.checked);
    REQUIRE(result.max_rel_err <= 1e-4);
}

TEST_CASE("convolution stack with ELU and dilation passes finite differences") {
    std::mt19937_64 rng(2);
    Network<double> net;
    net.layers.push_back(make_conv<double>(2, 3, 3, 1, -1, rng));
    net.layers.push_back(make_activation<double>(LayerKind::ELU, 0));
    net.layers.push_back(make_conv<double>(3, 2, 3, 2, 1, rng));
    net.layers.push_back(make_activation<double>(LayerKind::ReLU, 2));
    net.layers.push_back(make_conv<double>(2, 1, 1, 1, 3, rng));

    auto result = checked_run(net, {2, 2, 7, 7}, 200);
    CAPTURE(result.max_rel_err, result.checked);
    REQUIRE(result.max_rel_err <= 1e-4);
}

TEST_CASE("dense-connectivity pattern with Concat passes finite differences") {
    std::mt19937_64 rng(3);
    Network<double> net;
    net.layers.push_back(make_conv<double>(1, 1, 3, 1, -1, rng)); // 0
    net.layers.push_back(make_activation<double>(LayerKind::ReLU, 0)); // 1
    Layer<double> cat;
    cat.kind = LayerKind::Concat;
    cat.inputs = {-1, 1};
    net.layers.push_back(cat); // 2
    net.layers.push_back(make_conv<double>(2, 1, 3, 2, 2, rng)); // 3
    net.layers.push_back(make_activation<double>(LayerKind::LeakyReLU, 3)); // 4
    Layer<double> cat2;
    cat2.kind = LayerKind::Concat;
    cat2.inputs = {-1, 1, 4};
    net.layers.push_back(cat2); // 5
    net.layers.push_back(make_conv<double>(3, 1, 1, 1, 5, rng)); // 6

    auto result = checked_run(net, {1, 1, 6, 6}, 300);
    CAPTURE(result.max_rel_err, result.checked);
    REQUIRE(result.max_rel_err <= 1e-4);
}

TEST_CASE("dense layer that reshapes to an image passes finite differences") {
    std::mt19937_64 rng(4);
    Network<double> net;
    auto fc = make_dense<double>(8, 16, -1, rng);
    fc.dense_out_chw = {1, 4, 4};
    net.layers.push_back(fc);
    net.layers.push_back(make_activation<double>(LayerKind::ELU, 0));
    net.layers.push_back(make_conv<double>(1, 1, 3, 1, 1, rng));

    auto result = checked_run(net, {2, 8}, 400);
    CAPTURE(result.max_rel_err, result.checked);
    REQUIRE(result.max_rel_err <= 1e-4);
}

TEST_CASE("loss gradient matches finite differences of the scalar loss") {
    auto o = gradcheck::random_tensor<double>({2, 1, 3, 3}, 7);
    auto t = gradcheck::random_tensor<double>({2, 1, 3, 3}, 8);
    auto [loss, grad] = mse_loss(o, t);
    const double step = 1e-6;
    for (std::size_t i = 0; i < o.numel(); ++i) {
        const double saved = o.data[i];
        o.data[i] = saved + step;
        const double lp = mse_loss(o, t).first;
        o.data[i] = saved - step;
        const double lm = mse_loss(o, t).first;
        o.data[i] = saved;
        const double fd = (lp - lm) / (2.0 * step);
        REQUIRE(std::abs(fd - grad.data[i]) < 1e-6);
    }
}
