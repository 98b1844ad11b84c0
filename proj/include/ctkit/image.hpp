#pragma once

#include <cstddef>
#include <vector>

#include "ctkit/common.hpp"

namespace ctkit {

/// 2-D attenuation map on a square pixel raster. Row-major, row 0 at the top,
/// image center on the rotation axis.
struct ImageGrid {
    std::size_t width = 0;
    std::size_t height = 0;
    double pixel_size = 1.0;
    std::vector<double> data; // width*height values, row-major

    ImageGrid() = default;
    ImageGrid(std::size_t w, std::size_t h, double px = 1.0, double fill = 0.0)
        : width(w), height(h), pixel_size(px), data(w * h, fill) {
        validate();
    }

    void validate() const {
        require(width >= 1 && height >= 1, "ImageGrid: width and height must be >= 1");
        require(pixel_size > 0.0, "ImageGrid: pixel_size must be positive");
        require(data.size() == width * height, "ImageGrid: data length != width*height");
    }

    std::size_t size() const { return width * height; }

    double& at(std::size_t row, std::size_t col) { return data[row * width + col]; }
    double at(std::size_t row, std::size_t col) const { return data[row * width + col]; }

    // Pixel-center world coordinates; the rotation axis is the origin.
    double x_of_col(std::size_t col) const {
        return (static_cast<double>(col) - (static_cast<double>(width) - 1.0) / 2.0) * pixel_size;
    }
    double y_of_row(std::size_t row) const {
        return ((static_cast<double>(height) - 1.0) / 2.0 - static_cast<double>(row)) * pixel_size;
    }
};

} // namespace ctkit
