#pragma once

#include <numbers>

#include "ctkit/filter.hpp"
#include "ctkit/projector.hpp"

namespace ctkit {

/// Filtered back projection: ramp-filter each row, backproject with the
/// adjoint operator, and scale so the angle sum approximates the [0, pi)
/// integral. The adjoint carries a net h^2/ds footprint factor and the
/// convolution a ds quadrature factor, hence the ds^2/h^2 correction (unity
/// for the default spacing == pixel size).
inline ImageGrid fbp_reconstruct(const Sinogram& sino, const FilterSpec& spec = {}) {
    require(sino.n_angles() >= 1, "fbp_reconstruct: need at least one angle");
    const Sinogram filtered = filter_projections(sino, spec);
    ImageGrid image = back_project(filtered);
    const double ds = sino.geometry.detector_spacing;
    const double h = sino.geometry.image.pixel_size;
    const double scale = std::numbers::pi / static_cast<double>(sino.n_angles()) * (ds * ds) / (h * h);
    for (double& v : image.data) v *= scale;
    return image;
}

} // namespace ctkit
