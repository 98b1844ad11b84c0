#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ctkit/common.hpp"
#include "ctkit/geometry.hpp"
#include "ctkit/image.hpp"
#include "ctkit/parallel.hpp"
#include "ctkit/sinogram.hpp"

namespace ctkit {

namespace detail {

// Joseph's ray model: march along the ray's dominant axis in unit-pixel
// steps and interpolate linearly between the two pixels adjacent to the
// crossing point. The same trace feeds the forward scatter, the gather
// backprojection and the explicit system matrix, which is what makes the
// backprojector an exact transpose.
struct JosephTrace {
    bool march_rows;      // true when |cos| >= |sin|: one crossing per image row
    double sin_t, cos_t;
    double step;          // ray length per marching line: h / |dominant component|
    std::size_t n_lines;  // rows (march_rows) or columns
    std::size_t n_perp;   // extent of the interpolated axis
};

inline JosephTrace make_trace(double theta, const GridShape& img) {
    JosephTrace t;
    t.sin_t = std::sin(theta);
    t.cos_t = std::cos(theta);
    t.march_rows = std::abs(t.cos_t) >= std::abs(t.sin_t);
    const double dominant = t.march_rows ? std::abs(t.cos_t) : std::abs(t.sin_t);
    t.step = img.pixel_size / dominant;
    t.n_lines = t.march_rows ? img.height : img.width;
    t.n_perp = t.march_rows ? img.width : img.height;
    return t;
}

// Continuous coordinate along the interpolated axis where the ray at offset
// s crosses marching line `line` (a column coordinate when marching rows,
// a row coordinate when marching columns). Both projection directions and
// the matrix builder must evaluate this one expression so their weights are
// bitwise identical.
inline double perp_coord(const JosephTrace& t, const GridShape& img, double s, std::size_t line) {
    const double h = img.pixel_size;
    if (t.march_rows) {
        const double y = ((static_cast<double>(img.height) - 1.0) / 2.0 -
                          static_cast<double>(line)) * h;
        return ((s - y * t.sin_t) / t.cos_t) / h + (static_cast<double>(img.width) - 1.0) / 2.0;
    }
    const double x = (static_cast<double>(line) - (static_cast<double>(img.width) - 1.0) / 2.0) * h;
    return (static_cast<double>(img.height) - 1.0) / 2.0 - ((s - x * t.cos_t) / t.sin_t) / h;
}

// Detector offset whose trace crosses line `line` at perpendicular
// coordinate cc; inverse of perp_coord in s.
inline double s_of_perp(const JosephTrace& t, const GridShape& img, double cc, std::size_t line) {
    const double h = img.pixel_size;
    if (t.march_rows) {
        const double y = ((static_cast<double>(img.height) - 1.0) / 2.0 -
                          static_cast<double>(line)) * h;
        return (cc - (static_cast<double>(img.width) - 1.0) / 2.0) * t.cos_t * h + y * t.sin_t;
    }
    const double x = (static_cast<double>(line) - (static_cast<double>(img.width) - 1.0) / 2.0) * h;
    return ((static_cast<double>(img.height) - 1.0) / 2.0 - cc) * t.sin_t * h + x * t.cos_t;
}

inline std::size_t pixel_index(const JosephTrace& t, std::size_t width, std::size_t line,
                               std::size_t perp) {
    return t.march_rows ? line * width + perp : perp * width + line;
}

} // namespace detail

/// Line integrals of the image along every geometry ray (Joseph model).
/// Linear in the image and deterministic for any thread count.
inline Sinogram forward_project(const ImageGrid& image, const ParallelGeometry& geom) {
    image.validate();
    geom.validate();
    require(geom.image.matches(image),
            "forward_project: image dimensions do not match geometry");

    Sinogram sino(geom);
    std::vector<detail::JosephTrace> traces(geom.n_angles());
    for (std::size_t ai = 0; ai < geom.n_angles(); ++ai)
        traces[ai] = detail::make_trace(geom.angles[ai], geom.image);

    const std::size_t n_det = geom.n_detectors;
    parallel_for(geom.n_rays(), [&](std::size_t ray) {
        const std::size_t ai = ray / n_det;
        const std::size_t di = ray % n_det;
        const auto& t = traces[ai];
        const double s = geom.detector_s(di);
        const long n_perp = static_cast<long>(t.n_perp);
        double acc = 0.0;
        for (std::size_t line = 0; line < t.n_lines; ++line) {
            const double cc = detail::perp_coord(t, geom.image, s, line);
            const double fl = std::floor(cc);
            const long c0 = static_cast<long>(fl);
            const double f = cc - fl;
            if (c0 >= 0 && c0 < n_perp)
                acc += (1.0 - f) *
                       image.data[detail::pixel_index(t, image.width, line,
                                                      static_cast<std::size_t>(c0))];
            if (c0 + 1 >= 0 && c0 + 1 < n_perp)
                acc += f * image.data[detail::pixel_index(t, image.width, line,
                                                          static_cast<std::size_t>(c0 + 1))];
        }
        sino.data[ray] = acc * t.step;
    });
    return sino;
}

/// Exact adjoint of forward_project. Implemented as a per-pixel gather over
/// the rays whose interpolation footprint covers the pixel, using the same
/// trace arithmetic as the forward pass.
inline ImageGrid back_project(const Sinogram& sino) {
    sino.validate();
    const ParallelGeometry& geom = sino.geometry;
    ImageGrid image(geom.image.width, geom.image.height, geom.image.pixel_size);

    std::vector<detail::JosephTrace> traces(geom.n_angles());
    for (std::size_t ai = 0; ai < geom.n_angles(); ++ai)
        traces[ai] = detail::make_trace(geom.angles[ai], geom.image);

    const std::size_t width = image.width;
    const std::size_t n_det = geom.n_detectors;
    const double inv_spacing = 1.0 / geom.detector_spacing;
    const double det_center = (static_cast<double>(n_det) - 1.0) / 2.0;

    parallel_for(image.size(), [&](std::size_t pix) {
        const std::size_t row = pix / width;
        const std::size_t col = pix % width;
        double acc = 0.0;
        for (std::size_t ai = 0; ai < geom.n_angles(); ++ai) {
            const auto& t = traces[ai];
            const std::size_t line = t.march_rows ? row : col;
            const long perp = static_cast<long>(t.march_rows ? col : row);
            // Rays covering this pixel have perp_coord within (perp-1, perp+1);
            // invert the affine map to a detector-bin window (with slack for
            // rounding at the boundaries).
            const double sa = detail::s_of_perp(t, geom.image, static_cast<double>(perp) - 1.0, line);
            const double sb = detail::s_of_perp(t, geom.image, static_cast<double>(perp) + 1.0, line);
            const double ba = sa * inv_spacing + det_center;
            const double bb = sb * inv_spacing + det_center;
            long lo = static_cast<long>(std::floor(std::min(ba, bb))) - 1;
            long hi = static_cast<long>(std::ceil(std::max(ba, bb))) + 1;
            lo = std::max(lo, 0L);
            hi = std::min(hi, static_cast<long>(n_det) - 1);
            for (long di = lo; di <= hi; ++di) {
                const double s = geom.detector_s(static_cast<std::size_t>(di));
                const double cc = detail::perp_coord(t, geom.image, s, line);
                const double fl = std::floor(cc);
                const long c0 = static_cast<long>(fl);
                const double f = cc - fl;
                double w;
                if (c0 == perp)
                    w = (1.0 - f) * t.step;
                else if (c0 + 1 == perp)
                    w = f * t.step;
                else
                    continue;
                acc += w * sino.data[ai * n_det + static_cast<std::size_t>(di)];
            }
        }
        image.data[pix] = acc;
    });
    return image;
}

/// Explicit sparse W for oracle-scale problems.
struct SystemMatrix {
    struct Entry {
        std::uint32_t ray;
        std::uint32_t pixel;
        double weight;
    };

    std::size_t rows = 0; // n_angles * n_detectors
    std::size_t cols = 0; // width * height
    std::vector<Entry> entries;

    std::vector<double> apply(const ImageGrid& image) const {
        require(image.size() == cols, "SystemMatrix::apply: image size mismatch");
        std::vector<double> out(rows, 0.0);
        for (const auto& e : entries) out[e.ray] += e.weight * image.data[e.pixel];
        return out;
    }

    std::vector<double> apply_transpose(const std::vector<double>& ray_values) const {
        require(ray_values.size() == rows, "SystemMatrix::apply_transpose: size mismatch");
        std::vector<double> out(cols, 0.0);
        for (const auto& e : entries) out[e.pixel] += e.weight * ray_values[e.ray];
        return out;
    }

    std::vector<double> row_sums() const {
        std::vector<double> s(rows, 0.0);
        for (const auto& e : entries) s[e.ray] += e.weight;
        return s;
    }

    std::vector<double> col_sums() const {
        std::vector<double> s(cols, 0.0);
        for (const auto& e : entries) s[e.pixel] += e.weight;
        return s;
    }
};

inline constexpr std::size_t kSystemMatrixGuard = std::size_t{1} << 26;

/// Materialize the projector as sparse (ray, pixel, weight) triplets.
/// Bounded by rows*cols <= 2^26; beyond that the matrix-free operators are
/// the supported path.
inline SystemMatrix build_system_matrix(const ParallelGeometry& geom) {
    geom.validate();
    SystemMatrix m;
    m.rows = geom.n_rays();
    m.cols = geom.image.width * geom.image.height;
    require(m.rows * m.cols <= kSystemMatrixGuard,
            "build_system_matrix: problem too large for an explicit matrix; "
            "use the matrix-free forward_project/back_project operators");

    for (std::size_t ai = 0; ai < geom.n_angles(); ++ai) {
        const auto t = detail::make_trace(geom.angles[ai], geom.image);
        for (std::size_t di = 0; di < geom.n_detectors; ++di) {
            const std::uint32_t ray = static_cast<std::uint32_t>(ai * geom.n_detectors + di);
            const double s = geom.detector_s(di);
            const long n_perp = static_cast<long>(t.n_perp);
            for (std::size_t line = 0; line < t.n_lines; ++line) {
                const double cc = detail::perp_coord(t, geom.image, s, line);
                const double fl = std::floor(cc);
                const long c0 = static_cast<long>(fl);
                const double f = cc - fl;
                if (c0 >= 0 && c0 < n_perp && f < 1.0) {
                    const double w = (1.0 - f) * t.step;
                    if (w > 0.0)
                        m.entries.push_back({ray,
                                             static_cast<std::uint32_t>(detail::pixel_index(
                                                 t, geom.image.width, line,
                                                 static_cast<std::size_t>(c0))),
                                             w});
                }
                if (c0 + 1 >= 0 && c0 + 1 < n_perp && f > 0.0) {
                    const double w = f * t.step;
                    m.entries.push_back({ray,
                                         static_cast<std::uint32_t>(detail::pixel_index(
                                             t, geom.image.width, line,
                                             static_cast<std::size_t>(c0 + 1))),
                                         w});
                }
            }
        }
    }
    return m;
}

} // namespace ctkit
