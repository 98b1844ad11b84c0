#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "ctkit/common.hpp"
#include "ctkit/sinogram.hpp"

namespace ctkit {

/// Beer-Lambert acquisition: counts = i0 * exp(-p) per bin, optionally
/// Poisson-sampled with the given seed. Zero draws are clamped to 0.5
/// photons so the log transform stays defined.
inline IntensityRecord simulate_intensity(const Sinogram& sino, double i0, bool noisy,
                                          std::uint64_t seed = 0) {
    sino.validate();
    require(i0 > 0.0, "simulate_intensity: i0 must be positive");
    for (double p : sino.data)
        require(p >= 0.0, "simulate_intensity: negative projection values are unphysical");

    IntensityRecord rec(sino.geometry, i0, noisy);
    if (!noisy) {
        for (std::size_t i = 0; i < sino.data.size(); ++i)
            rec.counts[i] = i0 * std::exp(-sino.data[i]);
        return rec;
    }
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < sino.data.size(); ++i) {
        const double mean = i0 * std::exp(-sino.data[i]);
        std::poisson_distribution<std::uint64_t> poisson(mean);
        const double c = static_cast<double>(poisson(rng));
        rec.counts[i] = c > 0.0 ? c : 0.5;
    }
    return rec;
}

/// p = -ln(counts / i0); inverse of the noiseless acquisition.
inline Sinogram log_normalize(const IntensityRecord& rec) {
    require(rec.i0 > 0.0, "log_normalize: i0 must be positive");
    require(rec.counts.size() == rec.geometry.n_rays(), "log_normalize: counts size mismatch");
    Sinogram sino(rec.geometry);
    for (std::size_t i = 0; i < rec.counts.size(); ++i) {
        require(rec.counts[i] > 0.0, "log_normalize: nonpositive count");
        sino.data[i] = -std::log(rec.counts[i] / rec.i0);
    }
    return sino;
}

} // namespace ctkit
