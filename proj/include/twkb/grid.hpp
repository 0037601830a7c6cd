#pragma once

#include <cstddef>
#include <vector>

#include "twkb/errors.hpp"

namespace twkb {

/// Uniform grid on [a, b] with both endpoints included exactly.
inline std::vector<double> uniform_grid(double a, double b, std::size_t points) {
    if (points < 2) throw invalid_argument("uniform_grid: need at least 2 points");
    if (!(a < b)) throw invalid_argument("uniform_grid: require a < b");
    std::vector<double> x(points);
    const double h = (b - a) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) x[i] = a + static_cast<double>(i) * h;
    x.back() = b;
    return x;
}

inline double grid_spacing(const std::vector<double>& x) {
    return x.size() < 2 ? 0.0 : (x.back() - x.front()) / static_cast<double>(x.size() - 1);
}

}  // namespace twkb
