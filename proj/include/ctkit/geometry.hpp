#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "ctkit/common.hpp"
#include "ctkit/image.hpp"

namespace ctkit {

/// Shape of the reconstruction target (dimensions and pixel size, no data).
struct GridShape {
    std::size_t width = 0;
    std::size_t height = 0;
    double pixel_size = 1.0;

    GridShape() = default;
    GridShape(std::size_t w, std::size_t h, double px = 1.0) : width(w), height(h), pixel_size(px) {}
    explicit GridShape(const ImageGrid& img)
        : width(img.width), height(img.height), pixel_size(img.pixel_size) {}

    bool matches(const ImageGrid& img) const {
        return img.width == width && img.height == height && img.pixel_size == pixel_size;
    }
};

/// Smallest even detector count covering the image diagonal at unit spacing.
inline std::size_t default_detector_count(std::size_t width, std::size_t height) {
    const double diag = std::numbers::sqrt2 * static_cast<double>(std::max(width, height));
    auto n = static_cast<std::size_t>(std::ceil(diag));
    if (n % 2 != 0) ++n;
    return n;
}

/// Parallel-beam scan geometry. A ray (theta, s) runs along direction
/// (-sin t, cos t) offset by s along (cos t, sin t); detector bin i sits at
/// s = (i - (n_detectors-1)/2) * detector_spacing, centered on the rotation
/// axis.
struct ParallelGeometry {
    std::vector<double> angles; // radians, strictly increasing, in [0, pi)
    std::size_t n_detectors = 0;
    double detector_spacing = 1.0;
    GridShape image;

    ParallelGeometry() = default;
    ParallelGeometry(std::vector<double> angles_, std::size_t n_det, double spacing, GridShape img)
        : angles(std::move(angles_)), n_detectors(n_det), detector_spacing(spacing), image(img) {
        validate();
    }

    void validate() const {
        require(!angles.empty(), "ParallelGeometry: need at least one angle");
        require(n_detectors >= 1, "ParallelGeometry: n_detectors must be >= 1");
        require(detector_spacing > 0.0, "ParallelGeometry: detector_spacing must be positive");
        require(image.width >= 1 && image.height >= 1, "ParallelGeometry: empty image shape");
        require(image.pixel_size > 0.0, "ParallelGeometry: pixel_size must be positive");
        const double pi = std::numbers::pi;
        for (std::size_t i = 0; i < angles.size(); ++i) {
            require(angles[i] >= 0.0 && angles[i] < pi,
                    "ParallelGeometry: angles must lie in [0, pi)");
            if (i > 0)
                require(angles[i] > angles[i - 1],
                        "ParallelGeometry: angles must be strictly increasing");
        }
    }

    std::size_t n_angles() const { return angles.size(); }
    std::size_t n_rays() const { return angles.size() * n_detectors; }

    double detector_s(std::size_t bin) const {
        return (static_cast<double>(bin) - (static_cast<double>(n_detectors) - 1.0) / 2.0) *
               detector_spacing;
    }
};

/// K angles equally spaced over [0, pi).
inline std::vector<double> equispaced_angles(std::size_t count) {
    require(count >= 1, "equispaced_angles: count must be >= 1");
    std::vector<double> a(count);
    for (std::size_t k = 0; k < count; ++k)
        a[k] = std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
    return a;
}

/// Geometry with equispaced angles and diagonal-covering detector row.
inline ParallelGeometry make_geometry(std::size_t n_angles, GridShape img,
                                      std::size_t n_detectors = 0, double spacing = 0.0) {
    if (n_detectors == 0) n_detectors = default_detector_count(img.width, img.height);
    if (spacing <= 0.0) spacing = img.pixel_size;
    return ParallelGeometry(equispaced_angles(n_angles), n_detectors, spacing, img);
}

} // namespace ctkit
