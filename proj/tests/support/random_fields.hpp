#pragma once

// Random smooth trial densities for dominance and floor checks: seeded
// positive noise relaxed by a few explicit diffusion sweeps under the
// Dirichlet mask, then normalized.

#include <cstdint>
#include <vector>

#include "crlab/field.hpp"
#include "crlab/functionals.hpp"
#include "crlab/grid.hpp"

namespace testsupport {

inline crlab::GridField random_smooth_field(const crlab::GridPtr& grid, std::uint64_t seed,
                                            int sweeps = 30) {
    const crlab::Grid& G = *grid;
    crlab::GridField f = crlab::random_positive_field(grid, seed);
    double inv_sum = 0.0;
    for (int a = 0; a < G.dim(); ++a) {
        const double h = G.spacing()[static_cast<std::size_t>(a)];
        inv_sum += 1.0 / (h * h);
    }
    const double theta = 0.2 / inv_sum; // stable explicit step
    std::vector<double> next(G.size(), 0.0);
    for (int s = 0; s < sweeps; ++s) {
        for (std::size_t p = 0; p < G.size(); ++p) {
            if (!G.interior(p)) {
                next[p] = 0.0;
                continue;
            }
            double lap = 0.0;
            for (int a = 0; a < G.dim(); ++a) {
                const std::size_t st = G.stride()[static_cast<std::size_t>(a)];
                const double h = G.spacing()[static_cast<std::size_t>(a)];
                lap += (f.u[p - st] - 2.0 * f.u[p] + f.u[p + st]) / (h * h);
            }
            next[p] = f.u[p] + theta * lap;
        }
        f.u.swap(next);
    }
    return crlab::normalize(std::move(f));
}

} // namespace testsupport
