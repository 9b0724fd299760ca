#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "adapsne/errors.hpp"
#include "adapsne/matrix.hpp"

// g x g occupancy grid over the embedding and the Shannon entropy of its
// cell-frequency distribution. Natural log throughout, so the uniform
// histogram hits the theoretical maximum log(g^2) exactly.

namespace adapsne {

struct GridSpec {
    int g = 2;                              // cells per axis
    std::array<double, 2> base{};           // per-axis minima
    std::array<double, 2> cell_size{1, 1};  // per-axis cell extent
};

struct GridHistogram {
    GridSpec spec;
    std::vector<long long> counts;  // g*g, row-major: counts[row * g + col]
    long long total = 0;
};

inline double max_entropy(int g) { return std::log(static_cast<double>(g) * g); }

/// Fits the grid to the bounding box of the coordinates. Ranges are
/// inflated by 1e-9 (relative) so the maximum point lands inside the last
/// cell; a zero-extent axis gets cell size 1, putting everything in cell 0.
inline GridSpec fit_grid(const Matrix& coords, int g) {
    if (g < 2) throw ConfigError("fit_grid: g must be >= 2");
    if (coords.rows() < 1 || coords.cols() != 2) throw DataError("fit_grid: coords must be N x 2");
    GridSpec spec;
    spec.g = g;
    for (int axis = 0; axis < 2; ++axis) {
        double lo = coords(0, axis);
        double hi = coords(0, axis);
        for (std::size_t i = 1; i < coords.rows(); ++i) {
            lo = std::min(lo, coords(i, axis));
            hi = std::max(hi, coords(i, axis));
        }
        if (!std::isfinite(lo) || !std::isfinite(hi))
            throw DataError("fit_grid: non-finite coordinate");
        spec.base[axis] = lo;
        const double range = hi - lo;
        spec.cell_size[axis] = range > 0.0 ? range * (1.0 + 1e-9) / g : 1.0;
    }
    return spec;
}

/// Cell of a point: floor((y - base) / cell_size) per axis, clamped to
/// [0, g-1] to absorb rounding at the edges. Points beyond the clamp
/// tolerance indicate a grid fitted to different coordinates.
inline std::array<int, 2> cell_of(double y0, double y1, const GridSpec& spec) {
    const double y[2] = {y0, y1};
    std::array<int, 2> cell{};
    for (int axis = 0; axis < 2; ++axis) {
        const double extent = spec.g * spec.cell_size[axis];
        const double tol = 1e-7 * extent;
        if (y[axis] < spec.base[axis] - tol || y[axis] > spec.base[axis] + extent + tol)
            throw DataError("grid: point coordinate " + std::to_string(y[axis]) +
                            " lies outside the fitted grid on axis " + std::to_string(axis));
        int idx = static_cast<int>(std::floor((y[axis] - spec.base[axis]) / spec.cell_size[axis]));
        idx = std::max(0, std::min(spec.g - 1, idx));
        cell[axis] = idx;
    }
    return cell;
}

/// Bins every point into its cell. Conservation: sum of counts equals N.
inline GridHistogram histogram(const Matrix& coords, const GridSpec& spec) {
    if (coords.cols() != 2) throw DataError("histogram: coords must be N x 2");
    GridHistogram h;
    h.spec = spec;
    h.counts.assign(static_cast<std::size_t>(spec.g) * spec.g, 0);
    for (std::size_t i = 0; i < coords.rows(); ++i) {
        const auto cell = cell_of(coords(i, 0), coords(i, 1), spec);
        ++h.counts[static_cast<std::size_t>(cell[0]) * spec.g + cell[1]];
    }
    h.total = static_cast<long long>(coords.rows());
    return h;
}

/// Shannon entropy (nats) of the cell-occupancy frequencies.
inline double grid_entropy(const GridHistogram& h) {
    if (h.total < 1) throw DataError("grid_entropy: empty histogram");
    const double inv_total = 1.0 / static_cast<double>(h.total);
    double entropy = 0.0;
    for (long long c : h.counts) {
        if (c <= 0) continue;
        const double p = static_cast<double>(c) * inv_total;
        entropy -= p * std::log(p);
    }
    return entropy;
}

/// Loop-exit threshold H0 = (H_max - H_b) * alpha + H_b.
inline double entropy_threshold(double h_baseline, int g, double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw ConfigError("entropy_threshold: alpha must be in [0, 1]");
    const double h_max = max_entropy(g);
    if (h_baseline > h_max + 1e-12)
        throw DataError("entropy_threshold: baseline exceeds the maximum entropy");
    return (h_max - h_baseline) * alpha + h_baseline;
}

}  // namespace adapsne
