#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "crlab/eigensolver.hpp"
#include "crlab/field.hpp"
#include "crlab/functionals.hpp"
#include "crlab/grid.hpp"
#include "crlab/numerics.hpp"

namespace crlab {

/// Outcome of a constrained Fisher minimization: the optimal field, the
/// variance multiplier beta (length^-4), the achieved moments and a trace
/// of the iteration.
struct MinimizeResult {
    GridField field;
    double beta = 0.0;
    double variance = 0.0;
    double fisher = 0.0;
    std::vector<std::array<double, 3>> trace; // (iterate, fisher estimate, violation)
};

/// One sample of the beta -> ground state map.
struct CurvePoint {
    double beta = 0.0;
    double variance = 0.0;
    double fisher = 0.0;
    double energy = 0.0;
    bool ok = false;
    std::string message;
};

struct MinimizeOptions {
    double eigen_tol = 1e-8;
    int eigen_max_iter = 400;
    std::uint64_t seed = 42;
    double variance_rel_tol = 1e-8;
    int max_bisection_steps = 240;
    int max_bracket_expansions = 48;
};

namespace detail {

struct BetaSolve {
    EigenSolution solution;
    double variance = 0.0;
    double fisher = 0.0;
};

inline BetaSolve solve_at_beta(const GridPtr& grid, double beta, const MinimizeOptions& opts,
                               const std::vector<double>* warm) {
    const auto kind = HamiltonianOperator::Potential::Harmonic;
    const HamiltonianOperator op(grid, beta == 0.0 ? HamiltonianOperator::Potential::Zero : kind,
                                 beta);
    BetaSolve out;
    out.solution = ground_state(op, opts.eigen_tol, opts.eigen_max_iter, opts.seed, warm);
    out.variance = variance(out.solution.field);
    out.fisher = fisher_information(out.solution.field);
    return out;
}

} // namespace detail

/// Global Fisher minimum over all densities on a bounded domain: the
/// infinite-well ground state (multiplier beta = 0). Its variance is the
/// pivot value <x^2>_* separating the signs of beta in the constrained
/// problem.
inline MinimizeResult min_fisher_bounded(const GridPtr& grid,
                                         const MinimizeOptions& opts = {}) {
    detail::BetaSolve s = detail::solve_at_beta(grid, 0.0, opts, nullptr);
    MinimizeResult r;
    r.field = std::move(s.solution.field);
    r.beta = 0.0;
    r.variance = s.variance;
    r.fisher = s.fisher;
    r.trace.push_back({0.0, s.fisher, 0.0});
    return r;
}

/// Minimal Fisher information at a prescribed variance on a bounded grid.
///
/// The optimizer is the ground state of -1/2 laplacian + (beta/8)|x|^2 for
/// the beta whose ground-state variance equals the target; beta is located
/// by bisection over a geometrically expanded bracket (ground-state
/// variance is strictly decreasing in beta, which the search asserts).
/// Sign of the returned beta follows the pivot rule: positive below
/// <x^2>_*, negative above, declared zero within
/// 1e-6 * (grid diameter)^-4 of it.
inline MinimizeResult min_fisher_at_variance(const GridPtr& grid, double target_variance,
                                             const MinimizeOptions& opts = {}) {
    if (!(target_variance > 0.0))
        throw ValidationError("target variance must be positive");
    const double scale = 1.0 / std::pow(grid->diameter(), 4);

    std::vector<std::array<double, 3>> trace;
    int iterate = 0;
    std::vector<double> warm;
    const auto probe = [&](double beta) {
        detail::BetaSolve s =
            detail::solve_at_beta(grid, beta, opts, warm.empty() ? nullptr : &warm);
        warm = s.solution.field.u;
        trace.push_back({static_cast<double>(iterate++), s.fisher,
                         std::abs(s.variance - target_variance) / target_variance});
        return s;
    };

    // Truncated grids stand in for unbounded domains, where only beta >= 0
    // is meaningful; genuinely bounded grids admit the negative-beta branch.
    const bool truncated = grid->domain().was_truncated();
    double beta_lo = truncated ? 0.0 : -16.0 * scale; // low beta -> large variance
    double beta_hi = +16.0 * scale;
    detail::BetaSolve lo = probe(beta_lo);
    detail::BetaSolve hi = probe(beta_hi);
    if (!(lo.variance > hi.variance))
        throw NumericError("ground-state variance failed to decrease in beta");

    // Third sign case: a target at the well variance resolves to beta = 0.
    // The variance tolerance cannot distinguish multipliers finer than the
    // declared-zero threshold, so the zero probe settles it directly.
    {
        detail::BetaSolve zero = truncated ? lo : probe(0.0);
        if (std::abs(zero.variance - target_variance) <=
            2.0 * opts.variance_rel_tol * target_variance) {
            MinimizeResult r;
            r.field = std::move(zero.solution.field);
            r.beta = 0.0;
            r.variance = zero.variance;
            r.fisher = zero.fisher;
            r.trace = std::move(trace);
            return r;
        }
    }

    int expansions = 0;
    while (lo.variance < target_variance) {
        if (truncated || ++expansions > opts.max_bracket_expansions)
            throw ValidationError("target variance outside attainable range [" +
                                  std::to_string(hi.variance) + ", " +
                                  std::to_string(lo.variance) + "]");
        beta_lo *= 4.0;
        lo = probe(beta_lo);
    }
    while (hi.variance > target_variance) {
        if (++expansions > opts.max_bracket_expansions)
            throw ValidationError("target variance outside attainable range [" +
                                  std::to_string(hi.variance) + ", " +
                                  std::to_string(lo.variance) + "]");
        beta_hi *= 4.0;
        hi = probe(beta_hi);
    }

    detail::BetaSolve best;
    double best_beta;
    if (std::abs(lo.variance - target_variance) < std::abs(hi.variance - target_variance)) {
        best = lo;
        best_beta = beta_lo;
    } else {
        best = hi;
        best_beta = beta_hi;
    }
    for (int step = 0; step < opts.max_bisection_steps; ++step) {
        if (std::abs(best.variance - target_variance) <=
            opts.variance_rel_tol * target_variance)
            break;
        const double mid = 0.5 * (beta_lo + beta_hi);
        if (!(mid > beta_lo) || !(mid < beta_hi)) break; // interval exhausted
        detail::BetaSolve m = probe(mid);
        if (!(m.variance < lo.variance) || !(m.variance > hi.variance))
            throw NumericError("ground-state variance failed to decrease in beta");
        if (std::abs(m.variance - target_variance) <
            std::abs(best.variance - target_variance)) {
            best = m;
            best_beta = mid;
        }
        if (m.variance > target_variance) {
            beta_lo = mid;
            lo = std::move(m);
        } else {
            beta_hi = mid;
            hi = std::move(m);
        }
    }
    if (std::abs(best.variance - target_variance) > opts.variance_rel_tol * target_variance &&
        std::abs(best.variance - target_variance) > 1e-6 * target_variance)
        throw NumericError("beta bisection stalled before meeting the variance tolerance");

    MinimizeResult r;
    if (std::abs(best_beta) < 1e-6 * scale) {
        // declared zero: report the exact well ground state
        detail::BetaSolve z = detail::solve_at_beta(grid, 0.0, opts, &warm);
        r.field = std::move(z.solution.field);
        r.beta = 0.0;
        r.variance = z.variance;
        r.fisher = z.fisher;
    } else {
        r.field = std::move(best.solution.field);
        r.beta = best_beta;
        r.variance = best.variance;
        r.fisher = best.fisher;
    }
    r.trace = std::move(trace);
    return r;
}

/// Ground-state scan over a list of beta values: (beta, variance, fisher,
/// energy) per entry; solver failures are reported per entry rather than
/// thrown. Variance must decrease strictly along increasing beta over the
/// successful entries.
inline std::vector<CurvePoint> variance_of_beta_curve(const GridPtr& grid,
                                                      const std::vector<double>& betas,
                                                      const MinimizeOptions& opts = {}) {
    std::vector<CurvePoint> out;
    out.reserve(betas.size());
    std::vector<double> warm;
    for (double b : betas) {
        CurvePoint pt;
        pt.beta = b;
        try {
            detail::BetaSolve s =
                detail::solve_at_beta(grid, b, opts, warm.empty() ? nullptr : &warm);
            warm = s.solution.field.u;
            pt.variance = s.variance;
            pt.fisher = s.fisher;
            pt.energy = s.solution.energy;
            pt.ok = true;
        } catch (const std::exception& e) {
            pt.ok = false;
            pt.message = e.what();
        }
        out.push_back(std::move(pt));
    }
    std::vector<CurvePoint> sorted;
    for (const auto& p : out)
        if (p.ok) sorted.push_back(p);
    std::sort(sorted.begin(), sorted.end(),
              [](const CurvePoint& a, const CurvePoint& b) { return a.beta < b.beta; });
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
        if (!(sorted[i].variance > sorted[i + 1].variance))
            throw NumericError("ground-state variance failed to decrease in beta");
    return out;
}

namespace detail {

/// Projection onto { sum(w x^2) = 1, sum(w q x^2) = target } with
/// x = y / (1 + mu + nu q): a two-multiplier Newton solve, with a robust
/// bisection fallback for far-from-feasible starting points.
struct ConstraintProjector {
    const Grid& grid;
    double target;
    double mu = 0.0;
    double nu = 0.0;

    ConstraintProjector(const Grid& g, double t) : grid(g), target(t) {}

    bool newton(const std::vector<double>& y, std::vector<double>& x) {
        const std::size_t n = y.size();
        double m = mu, v = nu;
        for (int it = 0; it < 60; ++it) {
            double a = 0.0, b = 0.0, j11 = 0.0, j12 = 0.0, j22 = 0.0;
            double min_denom = std::numeric_limits<double>::infinity();
            for (std::size_t p = 0; p < n; ++p) {
                if (!grid.interior(p)) continue;
                const double q = grid.radius_sq(p);
                const double d = 1.0 + m + v * q;
                min_denom = std::min(min_denom, d);
                if (d <= 1e-12) break;
                const double w = grid.weight(p);
                const double x2 = y[p] * y[p] / (d * d);
                a += w * x2;
                b += w * q * x2;
                const double c = w * x2 / d;
                j11 += -2.0 * c;
                j12 += -2.0 * q * c;
                j22 += -2.0 * q * q * c;
            }
            if (min_denom <= 1e-12) return false;
            const double ra = a - 1.0;
            const double rb = b - target;
            if (std::abs(ra) <= 1e-13 && std::abs(rb) <= 1e-13 * std::max(1.0, target)) {
                mu = m;
                nu = v;
                x.resize(n);
                for (std::size_t p = 0; p < n; ++p)
                    x[p] = grid.interior(p) ? y[p] / (1.0 + m + v * grid.radius_sq(p)) : 0.0;
                return true;
            }
            const double det = j11 * j22 - j12 * j12;
            if (!(std::abs(det) > 1e-300)) return false;
            double dm = -(j22 * ra - j12 * rb) / det;
            double dv = -(-j12 * ra + j11 * rb) / det;
            // dampen steps that would cross a pole of the parametrization
            for (int half = 0; half < 60; ++half) {
                bool safe = true;
                for (std::size_t p = 0; p < n; ++p) {
                    if (!grid.interior(p)) continue;
                    if (1.0 + (m + dm) + (v + dv) * grid.radius_sq(p) <= 1e-12) {
                        safe = false;
                        break;
                    }
                }
                if (safe) break;
                dm *= 0.5;
                dv *= 0.5;
            }
            m += dm;
            v += dv;
        }
        return false;
    }

    /// Bisection on nu with exact renormalization; always lands on the
    /// manifold when the target is attainable for this direction.
    bool bisect(const std::vector<double>& y, std::vector<double>& x) {
        const std::size_t n = y.size();
        double q_max = 0.0, q_min = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < n; ++p)
            if (grid.interior(p)) {
                q_max = std::max(q_max, grid.radius_sq(p));
                q_min = std::min(q_min, grid.radius_sq(p));
            }
        const auto ratio = [&](double v) {
            double a = 0.0, b = 0.0;
            for (std::size_t p = 0; p < n; ++p) {
                if (!grid.interior(p)) continue;
                const double d = 1.0 + v * grid.radius_sq(p);
                const double t = y[p] / d;
                a += grid.weight(p) * t * t;
                b += grid.weight(p) * grid.radius_sq(p) * t * t;
            }
            return b / a;
        };
        double lo = -1.0 / q_max + 1e-9 / q_max, hi = 1.0;
        while (ratio(hi) > target) {
            hi *= 4.0;
            if (hi > 1e18) return false;
        }
        if (ratio(lo) < target) return false;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (ratio(mid) > target ? lo : hi) = mid;
        }
        const double v = 0.5 * (lo + hi);
        double norm = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            if (!grid.interior(p)) continue;
            const double t = y[p] / (1.0 + v * grid.radius_sq(p));
            norm += grid.weight(p) * t * t;
        }
        const double c = std::sqrt(norm);
        x.assign(n, 0.0);
        for (std::size_t p = 0; p < n; ++p)
            if (grid.interior(p)) x[p] = y[p] / ((1.0 + v * grid.radius_sq(p)) * c);
        mu = c - 1.0; // x = y / (c + c nu q): same family with rescaled multipliers
        nu = c * v;
        return true;
    }

    void project(const std::vector<double>& y, std::vector<double>& x) {
        if (newton(y, x)) return;
        mu = 0.0;
        nu = 0.0;
        if (!bisect(y, x)) throw NumericError("projection Newton failure");
        std::vector<double> polished;
        if (newton(x, polished)) x = std::move(polished);
    }
};

/// Least-squares estimate of (E, beta) for a field treated as an eigenstate
/// of -1/2 laplacian + (beta/8)|x|^2, from projections onto u and q u.
inline std::pair<double, double> estimate_multiplier(const GridField& field) {
    const Grid& G = *field.grid;
    const HamiltonianOperator op(field.grid, HamiltonianOperator::Potential::Zero, 0.0);
    std::vector<double> t(field.u.size());
    op.apply(field.u, t);
    double ut = 0.0, qt = 0.0, v1 = 0.0, v2 = 0.0, uu = 0.0;
    for (std::size_t p = 0; p < t.size(); ++p) {
        const double w = G.weight(p);
        const double q = G.radius_sq(p);
        const double u = field.u[p];
        ut += w * u * t[p];
        qt += w * q * u * t[p];
        v1 += w * q * u * u;
        v2 += w * q * q * u * u;
        uu += w * u * u;
    }
    // [uu, -v1; v1, -v2] [E; beta/8] = [ut; qt]
    const double det = uu * (-v2) + v1 * v1;
    if (!(std::abs(det) > 1e-300)) throw NumericError("multiplier estimate singular");
    const double e = (ut * (-v2) + v1 * qt) / det;
    const double b8 = (uu * qt - v1 * ut) / det;
    return {e, 8.0 * b8};
}

} // namespace detail

/// Independent cross-check of the constrained minimum: plain gradient
/// descent on the discrete Fisher quadratic form 8<u, -1/2 laplacian u>,
/// re-projected after every step onto the normalization + variance
/// manifold by a two-multiplier Newton correction. `step` is in units of
/// inverse energy; step <= 0 picks 0.9 / (Gershgorin upper bound). The
/// trace records the quadratic-form Fisher estimate, which is
/// nonincreasing along accepted steps; a step that raises it is undone and
/// halved, and only an underflowing step is an error.
inline MinimizeResult projected_gradient_min(const GridPtr& grid, double target_variance,
                                             const GridField& init, double step, int iters) {
    if (!init.grid || !same_grid(*init.grid, *grid))
        throw ValidationError("projected gradient: init lives on a different grid");
    if (!init.normalized) throw ValidationError("projected gradient: init must be normalized");
    if (!(target_variance > 0.0)) throw ValidationError("target variance must be positive");
    for (std::size_t p = 0; p < init.u.size(); ++p)
        if (grid->interior(p) && !(init.u[p] > 0.0))
            throw ValidationError("projected gradient: init must be positive inside the domain");
    if (iters < 1) throw ValidationError("projected gradient: iters must be >= 1");

    const Grid& G = *grid;
    const HamiltonianOperator op(grid, HamiltonianOperator::Potential::Zero, 0.0);
    double theta = step > 0.0 ? step : 0.9 / op.gershgorin_upper();

    const auto quad_fisher = [&](const std::vector<double>& u) {
        std::vector<double> hu(u.size());
        op.apply(u, hu);
        std::vector<double> integrand(u.size());
        for (std::size_t p = 0; p < u.size(); ++p)
            integrand[p] = G.weight(p) * u[p] * hu[p];
        return 8.0 * pairwise_sum(integrand);
    };
    const auto violation = [&](const std::vector<double>& u) {
        std::vector<double> integrand(u.size());
        for (std::size_t p = 0; p < u.size(); ++p)
            integrand[p] = G.weight(p) * G.radius_sq(p) * u[p] * u[p];
        return std::abs(pairwise_sum(integrand) - target_variance) / target_variance;
    };

    detail::ConstraintProjector projector(G, target_variance);
    std::vector<double> x;
    projector.project(init.u, x); // feasible starting point

    MinimizeResult r;
    double f_curr = quad_fisher(x);
    const int stride = std::max(1, iters / 200);
    r.trace.push_back({0.0, f_curr, violation(x)});

    std::vector<double> hx(x.size()), y(x.size()), x_next;
    int stall = 0;
    for (int it = 1; it <= iters; ++it) {
        op.apply(x, hx);
        for (std::size_t p = 0; p < x.size(); ++p) y[p] = x[p] - theta * hx[p];
        projector.project(y, x_next);
        const double f_next = quad_fisher(x_next);
        if (f_next > f_curr * (1.0 + 1e-10) + 1e-300) {
            theta *= 0.5;
            if (theta < 1e-250) throw NumericError("projected gradient step underflow");
            continue; // retry from the same x
        }
        if (std::abs(f_next - f_curr) <= 1e-14 * std::abs(f_curr)) {
            if (++stall > 50) {
                x.swap(x_next);
                f_curr = f_next;
                r.trace.push_back({static_cast<double>(it), f_curr, violation(x)});
                break;
            }
        } else {
            stall = 0;
        }
        x.swap(x_next);
        f_curr = f_next;
        if (it % stride == 0 || it == iters)
            r.trace.push_back({static_cast<double>(it), f_curr, violation(x)});
    }

    GridField out(grid);
    out.u = x;
    r.field = normalize(std::move(out));
    r.variance = variance(r.field);
    r.fisher = fisher_information(r.field);
    r.beta = detail::estimate_multiplier(r.field).second;
    return r;
}

} // namespace crlab
