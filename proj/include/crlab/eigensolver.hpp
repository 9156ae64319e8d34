#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crlab/field.hpp"
#include "crlab/functionals.hpp"
#include "crlab/grid.hpp"
#include "crlab/numerics.hpp"

namespace crlab {

/// Matrix-free discrete Hamiltonian -1/2 laplacian + V on a masked grid.
///
/// The Laplacian is the (2D+1)-point O(h^2) stencil; exterior nodes are
/// pinned to zero (Dirichlet), so the operator maps interior-supported
/// fields to interior-supported fields and is symmetric by construction.
/// Potentials: zero (infinite well) or harmonic (beta/8) |x|^2.
class HamiltonianOperator {
public:
    enum class Potential { Zero, Harmonic };

    HamiltonianOperator(GridPtr grid, Potential kind, double beta)
        : grid_(std::move(grid)), kind_(kind), beta_(kind == Potential::Zero ? 0.0 : beta) {
        const Grid& G = *grid_;
        if (G.interior_count() == 0)
            throw ValidationError("hamiltonian: grid has no interior nodes");
        if (kind_ == Potential::Harmonic && !(beta_ > 0.0) && beta_ != 0.0 &&
            G.domain().was_truncated())
            throw ValidationError("harmonic confinement requires positive beta on "
                                  "truncated unbounded domains");
        const int D = G.dim();
        half_inv_h2_.resize(static_cast<std::size_t>(D));
        double diag_lap = 0.0;
        for (int a = 0; a < D; ++a) {
            const double h = G.spacing()[static_cast<std::size_t>(a)];
            half_inv_h2_[static_cast<std::size_t>(a)] = 0.5 / (h * h);
            diag_lap += 1.0 / (h * h);
        }
        diag_.assign(G.size(), 0.0);
        for (std::size_t p = 0; p < G.size(); ++p) {
            if (!G.interior(p)) continue;
            double v = 0.0;
            if (kind_ == Potential::Harmonic) v = beta_ / 8.0 * G.radius_sq(p);
            diag_[p] = diag_lap + v;
        }
        compute_gershgorin();
    }

    const GridPtr& grid() const { return grid_; }
    Potential potential() const { return kind_; }
    double beta() const { return beta_; }
    double gershgorin_lower() const { return gersh_lo_; }
    double gershgorin_upper() const { return gersh_hi_; }

    /// out = (H - shift) in. Exterior components of out are zero; exterior
    /// components of in are read as zero and must be kept zero by callers.
    void apply(std::span<const double> in, std::span<double> out, double shift = 0.0) const {
        const Grid& G = *grid_;
        const int D = G.dim();
        parallel_for(G.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t p = b; p < e; ++p) {
                if (!G.interior(p)) {
                    out[p] = 0.0;
                    continue;
                }
                double acc = (diag_[p] - shift) * in[p];
                for (int a = 0; a < D; ++a) {
                    const std::size_t s = G.stride()[static_cast<std::size_t>(a)];
                    acc -= half_inv_h2_[static_cast<std::size_t>(a)] * (in[p - s] + in[p + s]);
                }
                out[p] = acc;
            }
        });
    }

private:
    void compute_gershgorin() {
        const Grid& G = *grid_;
        const int D = G.dim();
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        std::vector<int> multi;
        for (std::size_t p = 0; p < G.size(); ++p) {
            if (!G.interior(p)) continue;
            double off = 0.0;
            G.unflatten(p, multi);
            for (int a = 0; a < D; ++a) {
                const std::size_t s = G.stride()[static_cast<std::size_t>(a)];
                if (G.interior(p - s)) off += half_inv_h2_[static_cast<std::size_t>(a)];
                if (G.interior(p + s)) off += half_inv_h2_[static_cast<std::size_t>(a)];
            }
            lo = std::min(lo, diag_[p] - off);
            hi = std::max(hi, diag_[p] + off);
        }
        gersh_lo_ = lo;
        gersh_hi_ = hi;
    }

    GridPtr grid_;
    Potential kind_;
    double beta_;
    std::vector<double> diag_;
    std::vector<double> half_inv_h2_;
    double gersh_lo_ = 0.0;
    double gersh_hi_ = 0.0;
};

inline HamiltonianOperator assemble(GridPtr grid, HamiltonianOperator::Potential kind,
                                    double beta = 0.0) {
    return HamiltonianOperator(std::move(grid), kind, beta);
}

/// One converged eigenpair plus convergence metadata. The eigenfield is
/// quadrature-normalized and sign-fixed positive-mean; `residual` is
/// ||H u - E u||_2 / max(1, |E|) on the unit 2-norm eigenvector.
struct EigenSolution {
    double energy = 0.0;
    GridField field;
    double residual = 0.0;
    int iterations = 0;
    bool degenerate = false;
    std::vector<std::pair<int, double>> residual_history;
};

namespace detail {

inline double vec_dot(std::span<const double> a, std::span<const double> b) {
    return pairwise_dot(a, b);
}

inline double vec_norm(std::span<const double> a) { return std::sqrt(pairwise_dot(a, a)); }

/// Conjugate gradients for the SPD shifted operator (H - shift). Returns
/// the iteration count; throws if the relative residual target cannot be
/// met within the cap.
inline int conjugate_gradient(const HamiltonianOperator& op, double shift,
                              std::span<const double> rhs, std::vector<double>& x,
                              double rel_tol, int max_iter) {
    const std::size_t n = rhs.size();
    std::vector<double> r(n), d(n), q(n);
    op.apply(x, q, shift);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) {
            r[p] = rhs[p] - q[p];
            d[p] = r[p];
        }
    });
    const double rhs_norm = vec_norm(rhs);
    if (rhs_norm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return 0;
    }
    double rho = vec_dot(r, r);
    const double target = rel_tol * rhs_norm;
    int it = 0;
    while (std::sqrt(rho) > target) {
        if (++it > max_iter)
            throw NumericError("conjugate gradient failed to converge (residual " +
                               std::to_string(std::sqrt(rho) / rhs_norm) + ")");
        op.apply(d, q, shift);
        const double alpha = rho / vec_dot(d, q);
        parallel_for(n, [&](std::size_t b, std::size_t e) {
            for (std::size_t p = b; p < e; ++p) {
                x[p] += alpha * d[p];
                r[p] -= alpha * q[p];
            }
        });
        const double rho_next = vec_dot(r, r);
        const double beta = rho_next / rho;
        rho = rho_next;
        parallel_for(n, [&](std::size_t b, std::size_t e) {
            for (std::size_t p = b; p < e; ++p) d[p] = r[p] + beta * d[p];
        });
    }
    return it;
}

inline void orthogonalize_against(std::vector<double>& v,
                                  const std::vector<std::vector<double>>& basis) {
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto& b : basis) {
            const double c = vec_dot(v, b);
            for (std::size_t p = 0; p < v.size(); ++p) v[p] -= c * b[p];
        }
        if (basis.empty()) break;
    }
}

inline EigenSolution inverse_iteration(const HamiltonianOperator& op,
                                       const std::vector<std::vector<double>>& deflate,
                                       double tol, int max_iter, std::uint64_t seed,
                                       const std::vector<double>* warm_start = nullptr) {
    if (!(tol > 0.0) || tol > 1e-4)
        throw ValidationError("eigensolver tolerance must lie in (0, 1e-4]");
    const Grid& G = *op.grid();
    const std::size_t n = G.size();
    const double shift = op.gershgorin_lower() - 1.0;

    std::vector<double> x(n, 0.0);
    if (warm_start && warm_start->size() == n) {
        x = *warm_start;
        for (std::size_t p = 0; p < n; ++p)
            if (!G.interior(p)) x[p] = 0.0;
    } else {
        for (std::size_t p = 0; p < n; ++p)
            if (G.interior(p)) x[p] = 0.5 + uniform01(seed, p);
    }
    orthogonalize_against(x, deflate);
    {
        const double nm = vec_norm(x);
        if (!(nm > 0.0)) throw NumericError("eigensolver start vector vanished");
        for (double& v : x) v /= nm;
    }

    std::vector<double> z(n, 0.0), hx(n);
    EigenSolution sol;
    double lambda = 0.0;
    double res = std::numeric_limits<double>::infinity();
    const int cg_cap = 200000;
    for (int it = 1; it <= max_iter; ++it) {
        // warm start: the previous iterate is nearly parallel to the solution
        if (it > 1 && lambda != shift)
            for (std::size_t p = 0; p < n; ++p) z[p] = x[p] / (lambda - shift);
        conjugate_gradient(op, shift, x, z, tol / 10.0, cg_cap);
        orthogonalize_against(z, deflate);
        const double nm = vec_norm(z);
        if (!(nm > 0.0)) throw NumericError("inverse iteration collapsed to zero vector");
        for (std::size_t p = 0; p < n; ++p) x[p] = z[p] / nm;
        op.apply(x, hx);
        lambda = vec_dot(x, hx);
        double acc = 0.0;
        {
            std::vector<double> resv(n);
            for (std::size_t p = 0; p < n; ++p) resv[p] = hx[p] - lambda * x[p];
            acc = vec_norm(resv);
        }
        res = acc / std::max(1.0, std::abs(lambda));
        sol.residual_history.emplace_back(it, res);
        sol.iterations = it;
        if (res <= tol) break;
    }
    if (res > tol)
        throw NumericError("eigensolver did not converge in " + std::to_string(max_iter) +
                           " iterations (residual " + std::to_string(res) + ")");

    sol.energy = lambda;
    sol.residual = res;
    GridField f(op.grid());
    f.u = x;
    sol.field = normalize(std::move(f));
    return sol;
}

} // namespace detail

/// Smallest eigenpair of the operator by shifted inverse power iteration
/// (shift = Gershgorin lower bound - 1, inner CG solves to tol/10).
/// Deterministic for a fixed seed. An optional warm-start vector replaces
/// the seeded start field when its size matches the grid.
inline EigenSolution ground_state(const HamiltonianOperator& op, double tol, int max_iter,
                                  std::uint64_t seed = 42,
                                  const std::vector<double>* warm_start = nullptr) {
    return detail::inverse_iteration(op, {}, tol, max_iter, seed, warm_start);
}

/// k lowest eigenpairs via deflated inverse iteration. Energies come out
/// nondecreasing; members of a near-degenerate cluster (gap below
/// 1e-8 |E|) are flagged and carry no ordering guarantee inside the
/// cluster.
inline std::vector<EigenSolution> excited_states(const HamiltonianOperator& op, int k,
                                                 double tol, int max_iter = 400,
                                                 std::uint64_t seed = 42) {
    if (k < 1 || k > 10) throw ValidationError("excited_states supports 1 <= k <= 10");
    std::vector<EigenSolution> states;
    std::vector<std::vector<double>> basis;
    for (int j = 0; j < k; ++j) {
        EigenSolution s = detail::inverse_iteration(op, basis, tol, max_iter, seed + 977u * j);
        // keep the unit 2-norm vector for deflation
        std::vector<double> v = s.field.u;
        const double nm = detail::vec_norm(v);
        for (double& val : v) val /= nm;
        basis.push_back(std::move(v));
        states.push_back(std::move(s));
    }
    for (std::size_t i = 0; i + 1 < states.size(); ++i) {
        const double gap = std::abs(states[i + 1].energy - states[i].energy);
        if (gap < 1e-8 * std::max(1e-300, std::abs(states[i].energy))) {
            states[i].degenerate = true;
            states[i + 1].degenerate = true;
        }
    }
    return states;
}

/// Discrete kinetic energy <u, -1/2 laplacian u> under the grid quadrature.
inline double kinetic_energy(const GridField& field) {
    const HamiltonianOperator op(field.grid, HamiltonianOperator::Potential::Zero, 0.0);
    std::vector<double> hu(field.u.size());
    op.apply(field.u, hu);
    std::vector<double> integrand(field.u.size());
    const Grid& G = *field.grid;
    for (std::size_t p = 0; p < hu.size(); ++p)
        integrand[p] = G.weight(p) * field.u[p] * hu[p];
    return pairwise_sum(integrand);
}

/// Relative defect of the confinement identity E^2 = (beta/16) F <x^2> on a
/// solved eigenpair. Only meaningful for harmonic confinement.
inline double virial_check(const EigenSolution& sol, double beta) {
    if (!(beta > 0.0))
        throw ValidationError("virial identity requires harmonic confinement");
    const double f = fisher_information(sol.field);
    const double v = variance(sol.field);
    const double e2 = sol.energy * sol.energy;
    return std::abs(e2 - beta / 16.0 * f * v) / e2;
}

} // namespace crlab
