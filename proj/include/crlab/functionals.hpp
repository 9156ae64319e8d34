#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "crlab/field.hpp"
#include "crlab/grid.hpp"
#include "crlab/numerics.hpp"

namespace crlab {

/// Scalar summary of one density: normalization sum(w u^2), second moment
/// about the origin (length^2), Fisher information (length^-2) and their
/// scale-invariant product.
struct FunctionalReport {
    double normalization = 0.0;
    double variance = 0.0;
    double fisher = 0.0;
    double cr_product = 0.0;
    std::vector<double> spacing;
};

namespace detail {

/// Per-axis derivative estimates on the masked grid.
///
/// Interior nodes use central differences; the zero stored at exterior
/// neighbors is the exact Dirichlet value, so the estimate stays O(h^2)
/// next to a wall. Wall (frontier) nodes use one-sided second-order
/// stencils reaching into the interior: a central difference across the
/// boundary would halve the normal derivative there, and well-type states
/// have a nonzero normal derivative at the wall.
struct GradientKernel {
    const Grid& grid;

    explicit GradientKernel(const Grid& g) : grid(g) {}

    /// Sum over axes of (d arr / d x_a)^2 at node p. `multi` is scratch.
    double grad_sq(const std::vector<double>& arr, std::size_t p,
                   std::vector<int>& multi) const {
        grid.unflatten(p, multi);
        const int D = grid.dim();
        double total = 0.0;
        if (grid.interior(p)) {
            for (int a = 0; a < D; ++a) {
                const std::size_t s = grid.stride()[static_cast<std::size_t>(a)];
                const double inv2h = 0.5 / grid.spacing()[static_cast<std::size_t>(a)];
                const double d = (arr[p + s] - arr[p - s]) * inv2h;
                total += d * d;
            }
            return total;
        }
        for (int a = 0; a < D; ++a) {
            const std::size_t s = grid.stride()[static_cast<std::size_t>(a)];
            const int k = multi[static_cast<std::size_t>(a)];
            const int n = grid.npts()[static_cast<std::size_t>(a)];
            const double inv2h = 0.5 / grid.spacing()[static_cast<std::size_t>(a)];
            const bool left_in = k >= 1 && grid.interior(p - s);
            const bool right_in = k <= n - 2 && grid.interior(p + s);
            double d = 0.0;
            if (right_in && !left_in) {
                const double a2 = (k + 2 <= n - 1) ? arr[p + 2 * s] : 0.0;
                d = (4.0 * arr[p + s] - a2) * inv2h;
            } else if (left_in && !right_in) {
                const double a2 = (k - 2 >= 0) ? arr[p - 2 * s] : 0.0;
                d = (-4.0 * arr[p - s] + a2) * inv2h;
            } else if (left_in && right_in) {
                d = (arr[p + s] - arr[p - s]) * inv2h;
            }
            total += d * d;
        }
        return total;
    }

    bool frontier(std::size_t p, std::vector<int>& multi) const {
        if (grid.interior(p)) return false;
        grid.unflatten(p, multi);
        for (int a = 0; a < grid.dim(); ++a) {
            const std::size_t s = grid.stride()[static_cast<std::size_t>(a)];
            const int k = multi[static_cast<std::size_t>(a)];
            const int n = grid.npts()[static_cast<std::size_t>(a)];
            if (k >= 1 && grid.interior(p - s)) return true;
            if (k <= n - 2 && grid.interior(p + s)) return true;
        }
        return false;
    }
};

} // namespace detail

/// Rescales the field so that sum(w u^2) = 1 (within 1e-12) and fixes the
/// sign so that sum(w u) >= 0. Direction of u is otherwise preserved.
inline GridField normalize(GridField field) {
    field.apply_mask();
    const Grid& G = *field.grid;
    std::vector<double> integrand(G.size());
    for (std::size_t p = 0; p < G.size(); ++p)
        integrand[p] = G.weight(p) * field.u[p] * field.u[p];
    const double s = pairwise_sum(integrand);
    if (!(s > 0.0) || !std::isfinite(s)) throw NumericError("null density");
    const double scale = 1.0 / std::sqrt(s);
    for (double& v : field.u) v *= scale;
    for (std::size_t p = 0; p < G.size(); ++p) integrand[p] = G.weight(p) * field.u[p];
    if (pairwise_sum(integrand) < 0.0)
        for (double& v : field.u) v = -v;
    field.normalized = true;
    return field;
}

/// Second moment integral sum(w |x|^2 u^2) about the origin.
inline double variance(const GridField& field) {
    if (!field.normalized) throw ValidationError("variance: field must be normalized");
    const Grid& G = *field.grid;
    std::vector<double> integrand(G.size());
    parallel_for(G.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p)
            integrand[p] = G.weight(p) * G.radius_sq(p) * field.u[p] * field.u[p];
    });
    return pairwise_sum(integrand);
}

/// Fisher information in the amplitude form 4 sum(w |grad u|^2).
/// Division-free and exact on the wave amplitude; wall nodes contribute
/// through one-sided stencils (see GradientKernel).
inline double fisher_information(const GridField& field) {
    if (!field.normalized) throw ValidationError("fisher: field must be normalized");
    const Grid& G = *field.grid;
    const detail::GradientKernel kernel(G);
    std::vector<double> integrand(G.size(), 0.0);
    parallel_for(G.size(), [&](std::size_t b, std::size_t e) {
        std::vector<int> multi;
        for (std::size_t p = b; p < e; ++p) {
            if (G.interior(p) || kernel.frontier(p, multi))
                integrand[p] = G.weight(p) * kernel.grad_sq(field.u, p, multi);
        }
    });
    return 4.0 * pairwise_sum(integrand);
}

/// Fisher information in the density form sum(w |grad g|^2 / g) for a
/// nonnegative density sample g (exterior entries zero). The denominator is
/// floored at 1e-300. At wall nodes |grad g|^2/g is a 0/0 limit equal to
/// 4 |grad sqrt(g)|^2, which is what gets quadratured there.
inline double fisher_information_density(const Grid& G, std::span<const double> g) {
    if (g.size() != G.size())
        throw ValidationError("fisher density: sample size does not match grid");
    constexpr double kFloor = 1e-300;
    const detail::GradientKernel kernel(G);
    std::vector<double> sqrt_g(G.size());
    parallel_for(G.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) sqrt_g[p] = std::sqrt(std::max(g[p], 0.0));
    });
    std::vector<double> gv(g.begin(), g.end());
    std::vector<double> integrand(G.size(), 0.0);
    parallel_for(G.size(), [&](std::size_t b, std::size_t e) {
        std::vector<int> multi;
        for (std::size_t p = b; p < e; ++p) {
            if (G.interior(p)) {
                const double num = kernel.grad_sq(gv, p, multi);
                integrand[p] = G.weight(p) * num / std::max(g[p], kFloor);
            } else if (kernel.frontier(p, multi)) {
                integrand[p] = G.weight(p) * 4.0 * kernel.grad_sq(sqrt_g, p, multi);
            }
        }
    });
    return pairwise_sum(integrand);
}

/// Full report: normalization, variance, Fisher information and the
/// Cramer-Rao product fisher * variance.
inline FunctionalReport cramer_rao_product(const GridField& field) {
    if (!field.normalized) throw ValidationError("report: field must be normalized");
    const Grid& G = *field.grid;
    FunctionalReport r;
    std::vector<double> integrand(G.size());
    for (std::size_t p = 0; p < G.size(); ++p)
        integrand[p] = G.weight(p) * field.u[p] * field.u[p];
    r.normalization = pairwise_sum(integrand);
    r.variance = variance(field);
    r.fisher = fisher_information(field);
    r.cr_product = r.fisher * r.variance;
    r.spacing = G.spacing();
    return r;
}

/// Lower bound of the Cramer-Rao product for centrally symmetric potentials:
///   4 (1 - 2|m| / (2l + D - 2)) (l + D/2)^2,
/// which equals exactly D^2 for l = 0 (the indeterminate factor at l = 0,
/// D = 2 is defined as 1).
inline double central_potential_bound(int l, int m, int D) {
    if (l < 0) throw ValidationError("orbital number l must be nonnegative");
    if (D < 2) throw ValidationError("central bound requires dimension >= 2");
    if (std::abs(m) > l) throw ValidationError("invalid magnetic number");
    if (l == 0) return static_cast<double>(D) * static_cast<double>(D);
    const double denom = 2.0 * l + D - 2.0;
    const double half = l + 0.5 * D;
    return 4.0 * (1.0 - 2.0 * std::abs(m) / denom) * half * half;
}

/// First-order response of the Fisher information to mixing a density u^2
/// into a reference density v^2:  g_eps = eps u^2 + (1 - eps) v^2.
///
/// For each requested eps this returns a difference-quotient estimate of
/// d F[g_eps] / d eps at eps = 0, refined by one Richardson step
/// (evaluations at eps and eps/2), so the estimate converges at second
/// order in eps. When v is an eigenstate of the confined problem with
/// multiplier beta, the limit is -beta (var(u) - var(v)).
///
/// v must be strictly positive at interior nodes (the mixture may not
/// vanish inside the domain); both fields must live on the same grid.
inline std::vector<double> mixture_expansion_slope(const GridField& u, const GridField& v,
                                                   const std::vector<double>& epsilons) {
    if (!u.grid || !v.grid || !same_grid(*u.grid, *v.grid))
        throw ValidationError("mixture slope: fields live on different grids");
    if (!u.normalized || !v.normalized)
        throw ValidationError("mixture slope: fields must be normalized");
    const Grid& G = *u.grid;
    for (std::size_t p = 0; p < G.size(); ++p)
        if (G.interior(p) && !(v.u[p] > 0.0))
            throw ValidationError("expansion requires nodeless v");
    for (double e : epsilons)
        if (!(e > 0.0) || !(e < 1.0))
            throw ValidationError("mixture slope: eps must lie in (0, 1)");

    std::vector<double> u2(G.size()), v2(G.size());
    for (std::size_t p = 0; p < G.size(); ++p) {
        u2[p] = u.u[p] * u.u[p];
        v2[p] = v.u[p] * v.u[p];
    }
    const double f_ref = fisher_information_density(G, v2);

    std::vector<double> mix(G.size());
    const auto quotient = [&](double eps) {
        for (std::size_t p = 0; p < G.size(); ++p)
            mix[p] = eps * u2[p] + (1.0 - eps) * v2[p];
        return (fisher_information_density(G, mix) - f_ref) / eps;
    };

    std::vector<double> slopes;
    slopes.reserve(epsilons.size());
    for (double eps : epsilons)
        slopes.push_back(2.0 * quotient(0.5 * eps) - quotient(eps));
    return slopes;
}

} // namespace crlab
