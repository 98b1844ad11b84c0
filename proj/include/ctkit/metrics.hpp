#pragma once

#include <cmath>
#include <vector>

#include "ctkit/common.hpp"
#include "ctkit/image.hpp"

namespace ctkit {

inline double rmse(const std::vector<double>& a, const std::vector<double>& b) {
    require(a.size() == b.size() && !a.empty(), "rmse: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.size()));
}

inline double rmse(const ImageGrid& a, const ImageGrid& b) {
    require(a.width == b.width && a.height == b.height, "rmse: image dimensions differ");
    return rmse(a.data, b.data);
}

inline constexpr double kPsnrCap = 99.0;

/// 20*log10(range / rmse) in dB, capped at 99 when the error vanishes.
inline double psnr(double range, double rmse_value) {
    if (rmse_value <= 0.0 || range <= 0.0) return kPsnrCap;
    const double db = 20.0 * std::log10(range / rmse_value);
    return db > kPsnrCap ? kPsnrCap : db;
}

} // namespace ctkit
