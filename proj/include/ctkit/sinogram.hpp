#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ctkit/common.hpp"
#include "ctkit/geometry.hpp"

namespace ctkit {

/// Stack of 1-D projections p_theta(s), one row per angle.
struct Sinogram {
    ParallelGeometry geometry;
    std::vector<double> data; // [angle][detector], row-major

    Sinogram() = default;
    explicit Sinogram(ParallelGeometry geom, double fill = 0.0)
        : geometry(std::move(geom)), data(geometry.n_rays(), fill) {}

    void validate() const {
        geometry.validate();
        require(data.size() == geometry.n_rays(), "Sinogram: data length != n_angles*n_detectors");
        for (double v : data) require(std::isfinite(v), "Sinogram: values must be finite");
    }

    std::size_t n_angles() const { return geometry.n_angles(); }
    std::size_t n_detectors() const { return geometry.n_detectors; }

    double& at(std::size_t angle, std::size_t det) {
        return data[angle * geometry.n_detectors + det];
    }
    double at(std::size_t angle, std::size_t det) const {
        return data[angle * geometry.n_detectors + det];
    }
};

/// Detected photon intensities I_theta(s), same layout as Sinogram.
/// Counts are strictly positive: zero Poisson draws are clamped to half a
/// photon so log-normalization stays defined.
struct IntensityRecord {
    ParallelGeometry geometry;
    double i0 = 0.0;   // source photons per detector bin
    bool noisy = false;
    std::vector<double> counts;

    IntensityRecord() = default;
    IntensityRecord(ParallelGeometry geom, double i0_, bool noisy_)
        : geometry(std::move(geom)), i0(i0_), noisy(noisy_), counts(geometry.n_rays(), 0.0) {}
};

} // namespace ctkit
