#pragma once

#include <functional>
#include <vector>

#include "crlab/grid.hpp"

namespace crlab {

/// Real wave-amplitude samples u(x) on a grid. The density is rho = u^2.
/// u is identically zero at every exterior node (Dirichlet mask); the
/// `normalized` flag records that sum(w u^2) = 1 within 1e-10.
struct GridField {
    GridPtr grid;
    std::vector<double> u;
    bool normalized = false;

    GridField() = default;
    explicit GridField(GridPtr g) : grid(std::move(g)), u(grid->size(), 0.0) {}

    void apply_mask() {
        const auto& mask = grid->interior_mask();
        for (std::size_t p = 0; p < u.size(); ++p)
            if (!mask[p]) u[p] = 0.0;
    }
};

/// Samples a callable fn(x) at interior nodes (exterior stays zero).
inline GridField sample_field(const GridPtr& grid,
                              const std::function<double(const std::vector<double>&)>& fn) {
    GridField f(grid);
    std::vector<double> x;
    for (std::size_t p = 0; p < grid->size(); ++p) {
        if (!grid->interior(p)) continue;
        grid->node_position(p, x);
        f.u[p] = fn(x);
    }
    return f;
}

/// Deterministic positive pseudo-random interior field in [0.5, 1.5).
inline GridField random_positive_field(const GridPtr& grid, std::uint64_t seed) {
    GridField f(grid);
    for (std::size_t p = 0; p < grid->size(); ++p)
        if (grid->interior(p)) f.u[p] = 0.5 + uniform01(seed, p);
    return f;
}

} // namespace crlab
