#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "ctkit/geometry.hpp"
#include "ctkit/image.hpp"
#include "ctkit/sinogram.hpp"

namespace testsup {

// Anti-aliased centered disk; radius as a fraction of the half-width.
inline ctkit::ImageGrid make_disk(std::size_t size, double radius_frac, double value,
                                  double pixel_size = 1.0) {
    ctkit::ImageGrid img(size, size, pixel_size);
    const double n = static_cast<double>(size);
    const double r2 = radius_frac * radius_frac;
    constexpr int kSub = 4;
    for (std::size_t row = 0; row < size; ++row) {
        for (std::size_t col = 0; col < size; ++col) {
            double acc = 0.0;
            for (int sy = 0; sy < kSub; ++sy)
                for (int sx = 0; sx < kSub; ++sx) {
                    const double x = (static_cast<double>(col) + (sx + 0.5) / kSub) * 2.0 / n - 1.0;
                    const double y = 1.0 - (static_cast<double>(row) + (sy + 0.5) / kSub) * 2.0 / n;
                    if (x * x + y * y <= r2) acc += value;
                }
            img.at(row, col) = acc / (kSub * kSub);
        }
    }
    return img;
}

// Smooth blob: its projection energy sits in the well-conditioned modes, so
// the iterative solvers converge at a testable pace.
inline ctkit::ImageGrid make_gaussian_blob(std::size_t size, double sigma = 0.35) {
    ctkit::ImageGrid img(size, size, 1.0);
    const double n = static_cast<double>(size);
    for (std::size_t r = 0; r < size; ++r)
        for (std::size_t c = 0; c < size; ++c) {
            const double x = (static_cast<double>(c) + 0.5) * 2.0 / n - 1.0;
            const double y = 1.0 - (static_cast<double>(r) + 0.5) * 2.0 / n;
            img.at(r, c) = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
        }
    return img;
}

inline ctkit::ImageGrid random_image(std::size_t w, std::size_t h, std::uint64_t seed,
                                     double lo = 0.0, double hi = 1.0) {
    ctkit::ImageGrid img(w, h);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    for (auto& v : img.data) v = dist(rng);
    return img;
}

inline ctkit::Sinogram random_sinogram(const ctkit::ParallelGeometry& geom, std::uint64_t seed,
                                       double lo = 0.0, double hi = 1.0) {
    ctkit::Sinogram sino(geom);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    for (auto& v : sino.data) v = dist(rng);
    return sino;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double rel_err(double got, double want) {
    const double denom = std::max(std::abs(want), 1e-300);
    return std::abs(got - want) / denom;
}

inline double l2(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

} // namespace testsup
