#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "ctkit/common.hpp"
#include "ctkit/image.hpp"
#include "ctkit/parallel.hpp"

namespace ctkit {

enum class PhantomKind { SheppLogan, RandomEllipses };

struct PhantomSpec {
    PhantomKind kind = PhantomKind::SheppLogan;
    std::size_t size = 128;
    double pixel_size = 1.0;
    // RandomEllipses parameters
    std::size_t n_ellipses_min = 3;
    std::size_t n_ellipses_max = 8;
    double attenuation_min = 0.1;
    double attenuation_max = 1.0;
    double clip_max = 1.0;
    std::uint64_t seed = 0;
};

namespace detail {

struct Ellipse {
    double cx, cy;   // center, in [-1, 1] image coordinates
    double a, b;     // semi-axes
    double phi;      // rotation, radians
    double value;    // additive attenuation
};

// Standard ten-ellipse head phantom parameter table.
inline const std::array<Ellipse, 10>& shepp_logan_table() {
    static const std::array<Ellipse, 10> table = {{
        {0.0, 0.0, 0.69, 0.92, 0.0, 2.0},
        {0.0, -0.0184, 0.6624, 0.874, 0.0, -0.98},
        {0.22, 0.0, 0.11, 0.31, -18.0 * std::numbers::pi / 180.0, -0.02},
        {-0.22, 0.0, 0.16, 0.41, 18.0 * std::numbers::pi / 180.0, -0.02},
        {0.0, 0.35, 0.21, 0.25, 0.0, 0.01},
        {0.0, 0.1, 0.046, 0.046, 0.0, 0.01},
        {0.0, -0.1, 0.046, 0.046, 0.0, 0.01},
        {-0.08, -0.605, 0.046, 0.023, 0.0, 0.01},
        {0.0, -0.606, 0.023, 0.023, 0.0, 0.01},
        {0.06, -0.605, 0.023, 0.046, 0.0, 0.01},
    }};
    return table;
}

inline double ellipse_sum(const std::vector<Ellipse>& ellipses, double x, double y) {
    double v = 0.0;
    for (const auto& e : ellipses) {
        const double dx = x - e.cx;
        const double dy = y - e.cy;
        const double c = std::cos(e.phi);
        const double s = std::sin(e.phi);
        const double u = (dx * c + dy * s) / e.a;
        const double w = (-dx * s + dy * c) / e.b;
        if (u * u + w * w <= 1.0) v += e.value;
    }
    return v;
}

// Rasterize with 4x4 subsamples per pixel; hard ellipse edges otherwise
// dominate projection-consistency errors.
inline ImageGrid rasterize_ellipses(const std::vector<Ellipse>& ellipses, std::size_t size,
                                    double pixel_size, double clip_min, double clip_max) {
    ImageGrid img(size, size, pixel_size);
    constexpr int kSub = 4;
    const double n = static_cast<double>(size);
    parallel_for(size, [&](std::size_t row) {
        for (std::size_t col = 0; col < size; ++col) {
            double acc = 0.0;
            for (int sy = 0; sy < kSub; ++sy) {
                for (int sx = 0; sx < kSub; ++sx) {
                    const double px = (static_cast<double>(col) + (sx + 0.5) / kSub) * 2.0 / n - 1.0;
                    const double py = 1.0 - (static_cast<double>(row) + (sy + 0.5) / kSub) * 2.0 / n;
                    acc += ellipse_sum(ellipses, px, py);
                }
            }
            double v = acc / (kSub * kSub);
            if (v < clip_min) v = clip_min;
            if (v > clip_max) v = clip_max;
            img.at(row, col) = v;
        }
    });
    return img;
}

} // namespace detail

/// Deterministic phantom generator. Shepp-Logan uses the standard table;
/// RandomEllipses draws seeded ellipses with additive, clipped attenuation.
inline ImageGrid make_phantom(const PhantomSpec& spec) {
    require(spec.size >= 8, "make_phantom: size must be >= 8");

    if (spec.kind == PhantomKind::SheppLogan) {
        const auto& table = detail::shepp_logan_table();
        std::vector<detail::Ellipse> ellipses(table.begin(), table.end());
        return detail::rasterize_ellipses(ellipses, spec.size, spec.pixel_size, 0.0, 2.0);
    }

    require(spec.n_ellipses_min <= spec.n_ellipses_max, "make_phantom: bad ellipse count range");
    require(spec.attenuation_min >= 0.0 && spec.attenuation_max <= 1.0 &&
                spec.attenuation_min <= spec.attenuation_max,
            "make_phantom: attenuation range must lie within [0, 1]");

    std::mt19937_64 rng(spec.seed);
    std::uniform_int_distribution<std::size_t> count_dist(spec.n_ellipses_min, spec.n_ellipses_max);
    std::uniform_real_distribution<double> center(-0.6, 0.6);
    std::uniform_real_distribution<double> axis(0.08, 0.45);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    std::uniform_real_distribution<double> value(spec.attenuation_min, spec.attenuation_max);

    const std::size_t count = count_dist(rng);
    std::vector<detail::Ellipse> ellipses;
    ellipses.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        detail::Ellipse e;
        e.cx = center(rng);
        e.cy = center(rng);
        e.a = axis(rng);
        e.b = axis(rng);
        e.phi = angle(rng);
        e.value = value(rng);
        ellipses.push_back(e);
    }
    return detail::rasterize_ellipses(ellipses, spec.size, spec.pixel_size, 0.0, spec.clip_max);
}

} // namespace ctkit
