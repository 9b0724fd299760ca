#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "adapsne/errors.hpp"
#include "adapsne/grid.hpp"
#include "adapsne/matrix.hpp"
#include "adapsne/rng.hpp"

// Grid sampling: representative indices are drawn by visiting the occupied
// cells round-robin (row-major order, seeded starting offset) and taking
// one point per visit, so no cell contributes twice before every cell that
// still has points contributed once.

namespace adapsne {

enum class PickMode {
    centroid,  // nearest unselected point to the cell centroid, ties to lower index
    random,    // uniform among the cell's unselected points
};

struct ExemplarSet {
    std::vector<std::size_t> indices;
    std::vector<std::array<int, 2>> cells;  // (row, col) the exemplar came from
};

inline ExemplarSet grid_sample(const Matrix& coords, const GridHistogram& h, std::size_t m,
                               std::uint64_t seed, PickMode pick = PickMode::centroid) {
    const std::size_t n = coords.rows();
    if (m < 1 || m > n)
        throw DataError("grid_sample: m=" + std::to_string(m) + " outside [1, " +
                        std::to_string(n) + "]");

    const int g = h.spec.g;
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(g) * g);
    for (std::size_t i = 0; i < n; ++i) {
        const auto cell = cell_of(coords(i, 0), coords(i, 1), h.spec);
        members[static_cast<std::size_t>(cell[0]) * g + cell[1]].push_back(i);
    }
    for (std::size_t c = 0; c < members.size(); ++c) {
        if (static_cast<long long>(members[c].size()) != h.counts[c])
            throw DataError("grid_sample: histogram does not match the coordinates");
    }

    std::vector<std::size_t> occupied;  // row-major cell ids
    for (std::size_t c = 0; c < members.size(); ++c)
        if (!members[c].empty()) occupied.push_back(c);

    Xoshiro256 rng(seed);
    const std::size_t start = static_cast<std::size_t>(rng.uniform_index(occupied.size()));

    std::vector<char> taken(n, 0);
    ExemplarSet out;
    out.indices.reserve(m);
    out.cells.reserve(m);

    std::size_t visit = 0;
    while (out.indices.size() < m) {
        const std::size_t cell_id = occupied[(start + visit) % occupied.size()];
        ++visit;
        auto& pts = members[cell_id];

        std::size_t chosen = n;  // sentinel: nothing available
        if (pick == PickMode::centroid) {
            const int row = static_cast<int>(cell_id) / g;
            const int col = static_cast<int>(cell_id) % g;
            const double c0 = h.spec.base[0] + (row + 0.5) * h.spec.cell_size[0];
            const double c1 = h.spec.base[1] + (col + 0.5) * h.spec.cell_size[1];
            double best_d2 = 0.0;
            for (std::size_t idx : pts) {
                if (taken[idx]) continue;
                const double d0 = coords(idx, 0) - c0;
                const double d1 = coords(idx, 1) - c1;
                const double d2 = d0 * d0 + d1 * d1;
                if (chosen == n || d2 < best_d2 || (d2 == best_d2 && idx < chosen)) {
                    chosen = idx;
                    best_d2 = d2;
                }
            }
        } else {
            std::vector<std::size_t> avail;
            avail.reserve(pts.size());
            for (std::size_t idx : pts)
                if (!taken[idx]) avail.push_back(idx);
            if (!avail.empty()) chosen = avail[rng.uniform_index(avail.size())];
        }

        if (chosen == n) continue;  // cell exhausted, move on
        taken[chosen] = 1;
        out.indices.push_back(chosen);
        out.cells.push_back({static_cast<int>(cell_id) / g, static_cast<int>(cell_id) % g});
    }
    return out;
}

}  // namespace adapsne
