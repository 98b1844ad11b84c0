#pragma once

#include <cmath>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "ctkit/common.hpp"
#include "ctkit/projector.hpp"

namespace ctkit {

/// Iterate state of the simultaneous iterative reconstruction.
/// row_sums[i] = sum_h w_ih, col_sums[j] = sum_i w_ij; entries at or below
/// kSirtInactive are treated as inactive (rays missing the grid, pixels no
/// ray touches) and contribute nothing to updates.
struct SirtState {
    ImageGrid estimate;
    std::size_t iteration = 0;
    std::vector<double> residual_history; // |p - W x^(k)|_2, index k
    std::vector<double> row_sums;
    std::vector<double> col_sums;
    std::vector<double> forward_cache;    // W x^(k), reused between steps
};

inline constexpr double kSirtInactive = 1e-12;

namespace detail {

inline double residual_norm(const std::vector<double>& p, const std::vector<double>& p_hat) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double r = p[i] - p_hat[i];
        acc += r * r;
    }
    return std::sqrt(acc);
}

} // namespace detail

/// Zero initial estimate plus matrix-free row/column sums: forward project
/// an all-ones image for the row sums, backproject an all-ones sinogram for
/// the column sums.
inline SirtState sirt_init(const Sinogram& sino) {
    sino.validate();
    const ParallelGeometry& geom = sino.geometry;

    SirtState st;
    st.estimate = ImageGrid(geom.image.width, geom.image.height, geom.image.pixel_size);

    ImageGrid ones(geom.image.width, geom.image.height, geom.image.pixel_size, 1.0);
    st.row_sums = forward_project(ones, geom).data;

    Sinogram ones_sino(geom, 1.0);
    st.col_sums = back_project(ones_sino).data;

    st.forward_cache.assign(geom.n_rays(), 0.0);
    st.residual_history.push_back(detail::residual_norm(sino.data, st.forward_cache));
    return st;
}

/// One simultaneous update: backproject the row-normalized residual, divide
/// by the column sums, add to the estimate. With `nonneg` the estimate is
/// clamped at zero afterwards.
inline SirtState sirt_step(const SirtState& state, const Sinogram& sino, bool nonneg = false) {
    require(!state.residual_history.empty(), "sirt_step: state not initialized");
    require(state.forward_cache.size() == sino.data.size(), "sirt_step: sinogram mismatch");

    SirtState next = state;

    Sinogram normalized(sino.geometry);
    for (std::size_t i = 0; i < sino.data.size(); ++i) {
        if (state.row_sums[i] > kSirtInactive)
            normalized.data[i] = (sino.data[i] - state.forward_cache[i]) / state.row_sums[i];
    }

    const ImageGrid update = back_project(normalized);
    for (std::size_t j = 0; j < next.estimate.data.size(); ++j) {
        if (state.col_sums[j] > kSirtInactive)
            next.estimate.data[j] += update.data[j] / state.col_sums[j];
        if (nonneg && next.estimate.data[j] < 0.0) next.estimate.data[j] = 0.0;
    }

    next.forward_cache = forward_project(next.estimate, sino.geometry).data;
    next.residual_history.push_back(detail::residual_norm(sino.data, next.forward_cache));
    next.iteration += 1;
    return next;
}

/// Run n_iter steps (or stop once residual/initial residual < tol, tol > 0).
inline std::pair<ImageGrid, SirtState> sirt_reconstruct(const Sinogram& sino, std::size_t n_iter,
                                                        bool nonneg = false, double tol = 0.0) {
    require(n_iter >= 1, "sirt_reconstruct: n_iter must be >= 1");
    SirtState st = sirt_init(sino);
    const double initial = st.residual_history.front();
    for (std::size_t k = 0; k < n_iter; ++k) {
        if (tol > 0.0 && initial > 0.0 && st.residual_history.back() / initial < tol) break;
        if (initial == 0.0) break; // already consistent with the zero image
        st = sirt_step(st, sino, nonneg);
    }
    return {st.estimate, st};
}

inline void write_residual_csv(const SirtState& state, const std::string& path) {
    std::ofstream out(path);
    require(out.good(), "write_residual_csv: cannot open " + path);
    out << "iteration,residual\n";
    for (std::size_t k = 0; k < state.residual_history.size(); ++k)
        out << k << "," << state.residual_history[k] << "\n";
}

} // namespace ctkit
