#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "ctkit/common.hpp"
#include "ctkit/fft.hpp"
#include "ctkit/parallel.hpp"
#include "ctkit/sinogram.hpp"

namespace ctkit {

enum class FilterKind { RamLak, Hann };

/// Ramp-filter configuration. padded_length == 0 selects the smallest power
/// of two >= 2 * n_detectors.
struct FilterSpec {
    FilterKind kind = FilterKind::RamLak;
    std::size_t padded_length = 0;
    double cutoff = 1.0; // fraction of Nyquist, (0, 1]

    std::size_t resolve_padding(std::size_t n_detectors) const {
        require(cutoff > 0.0 && cutoff <= 1.0, "FilterSpec: cutoff must be in (0, 1]");
        if (padded_length == 0) return detail::next_power_of_two(2 * n_detectors);
        require(detail::is_power_of_two(padded_length),
                "FilterSpec: padded_length must be a power of two");
        require(padded_length >= 2 * n_detectors,
                "FilterSpec: padded_length must be >= 2 * n_detectors");
        return padded_length;
    }
};

/// Band-limited spatial ramp kernel:
///   h[0] = 1/(4 ds^2),  h[n] = -1/(pi^2 n^2 ds^2) for odd n,  0 for even n != 0.
inline double ramp_kernel_value(long n, double detector_spacing) {
    const double ds2 = detector_spacing * detector_spacing;
    if (n == 0) return 1.0 / (4.0 * ds2);
    if (n % 2 == 0) return 0.0;
    const double nn = static_cast<double>(n);
    return -1.0 / (std::numbers::pi * std::numbers::pi * nn * nn * ds2);
}

namespace detail {

// Frequency response of the (optionally windowed) discrete ramp on a padded
// circular grid. The response is the FFT of the band-limited spatial kernel,
// not a naive |q| ramp, so the DC bin carries the kernel's true (small)
// residual rather than an artificial zero.
inline std::vector<std::complex<double>> ramp_frequency_response(std::size_t padded, double spacing,
                                                                 FilterKind kind, double cutoff) {
    std::vector<std::complex<double>> kernel(padded, 0.0);
    kernel[0] = ramp_kernel_value(0, spacing);
    for (std::size_t n = 1; n <= padded / 2; ++n) {
        const double v = ramp_kernel_value(static_cast<long>(n), spacing);
        kernel[n] = v;
        if (n < padded / 2) kernel[padded - n] = v; // even kernel, circular layout
    }
    fft_radix2(kernel, false);

    // Frequency bin k corresponds to |q|/q_Nyquist = 2k/padded (k <= padded/2).
    const double qmax = cutoff; // fraction of Nyquist
    for (std::size_t k = 0; k < padded; ++k) {
        const std::size_t k_sym = std::min(k, padded - k);
        const double fraq = 2.0 * static_cast<double>(k_sym) / static_cast<double>(padded);
        double w = 1.0;
        if (fraq > qmax) {
            w = 0.0;
        } else if (kind == FilterKind::Hann) {
            w = 0.5 * (1.0 + std::cos(std::numbers::pi * fraq / qmax));
        }
        kernel[k] *= w;
    }
    return kernel;
}

} // namespace detail

/// Ramp-filter every projection row: zero-pad to the spec's power-of-two
/// length, multiply in the frequency domain, transform back and truncate.
/// Padding to >= 2x the detector count removes circular wraparound, so for
/// RamLak at cutoff 1 the result equals direct convolution with the
/// closed-form kernel.
inline Sinogram filter_projections(const Sinogram& sino, const FilterSpec& spec = {}) {
    sino.validate();
    const std::size_t n_det = sino.n_detectors();
    const std::size_t padded = spec.resolve_padding(n_det);
    const auto response = detail::ramp_frequency_response(padded, sino.geometry.detector_spacing,
                                                          spec.kind, spec.cutoff);

    Sinogram out(sino.geometry);
    parallel_for(sino.n_angles(), [&](std::size_t ai) {
        std::vector<std::complex<double>> row(padded, 0.0);
        for (std::size_t d = 0; d < n_det; ++d) row[d] = sino.at(ai, d);
        detail::fft_radix2(row, false);
        for (std::size_t k = 0; k < padded; ++k) row[k] *= response[k];
        detail::fft_radix2(row, true);
        for (std::size_t d = 0; d < n_det; ++d) out.at(ai, d) = row[d].real();
    });
    return out;
}

} // namespace ctkit
