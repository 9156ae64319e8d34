#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "crlab/domain.hpp"
#include "crlab/numerics.hpp"

namespace crlab {

/// Uniform tensor-product grid over a bounded domain with Dirichlet masking.
///
/// Node layout is row-major (last axis fastest). Every node of the enclosing
/// box boundary layer is exterior, as is every node on or inside an excluded
/// sub-box; wave amplitudes are pinned to zero there. Quadrature weights are
/// per-axis trapezoidal products, so summing a weight-scaled integrand over
/// all nodes is the D-dimensional trapezoidal rule.
class Grid {
public:
    Grid(DomainSpec spec, std::vector<int> npts)
        : domain_(std::move(spec)), npts_(std::move(npts)) {
        build();
    }

    const DomainSpec& domain() const { return domain_; }
    int dim() const { return domain_.dimension; }
    std::size_t size() const { return total_; }
    const std::vector<int>& npts() const { return npts_; }
    const std::vector<double>& spacing() const { return spacing_; }
    const std::vector<std::size_t>& stride() const { return stride_; }
    const std::vector<std::vector<double>>& coords() const { return coords_; }

    bool interior(std::size_t flat) const { return interior_[flat] != 0; }
    const std::vector<std::uint8_t>& interior_mask() const { return interior_; }
    double weight(std::size_t flat) const { return weight_[flat]; }
    const std::vector<double>& weights() const { return weight_; }
    std::size_t interior_count() const { return interior_count_; }

    std::size_t index(const std::vector<int>& multi) const {
        std::size_t flat = 0;
        for (int a = 0; a < dim(); ++a)
            flat += static_cast<std::size_t>(multi[static_cast<std::size_t>(a)]) *
                    stride_[static_cast<std::size_t>(a)];
        return flat;
    }

    void unflatten(std::size_t flat, std::vector<int>& multi) const {
        multi.resize(static_cast<std::size_t>(dim()));
        for (int a = 0; a < dim(); ++a) {
            multi[static_cast<std::size_t>(a)] =
                static_cast<int>(flat / stride_[static_cast<std::size_t>(a)]);
            flat %= stride_[static_cast<std::size_t>(a)];
        }
    }

    void node_position(std::size_t flat, std::vector<double>& x) const {
        x.resize(static_cast<std::size_t>(dim()));
        std::size_t rest = flat;
        for (int a = 0; a < dim(); ++a) {
            const std::size_t k = rest / stride_[static_cast<std::size_t>(a)];
            rest %= stride_[static_cast<std::size_t>(a)];
            x[static_cast<std::size_t>(a)] = coords_[static_cast<std::size_t>(a)][k];
        }
    }

    /// |x|^2 of a node, precomputed for quadratures and potentials.
    double radius_sq(std::size_t flat) const { return rsq_[flat]; }
    const std::vector<double>& radius_sq_all() const { return rsq_; }

    /// Largest distance between two corners of the enclosing box.
    double diameter() const {
        double d2 = 0.0;
        for (int a = 0; a < dim(); ++a) {
            const auto& b = *domain_.bounds[static_cast<std::size_t>(a)];
            d2 += (b.second - b.first) * (b.second - b.first);
        }
        return std::sqrt(d2);
    }

    /// Replaces the per-axis coordinate arrays (used when a grid is rebuilt
    /// from a file whose coordinates must round-trip bit-exactly). Spacings
    /// and weights are kept; sizes must match.
    void override_coords(std::vector<std::vector<double>> coords) {
        for (int a = 0; a < dim(); ++a)
            if (coords[static_cast<std::size_t>(a)].size() !=
                static_cast<std::size_t>(npts_[static_cast<std::size_t>(a)]))
                throw ValidationError("override_coords: size mismatch");
        coords_ = std::move(coords);
        fill_positions();
    }

private:
    void build() {
        domain_.validate();
        if (!domain_.bounded())
            throw ValidationError(
                "grid requires a bounded domain; truncate unbounded axes first");
        if (static_cast<int>(npts_.size()) != dim())
            throw ValidationError("nodes_per_axis does not match domain dimension");
        for (int n : npts_)
            if (n < 8) throw ValidationError("grid too coarse: need at least 8 nodes per axis");

        const int D = dim();
        spacing_.resize(static_cast<std::size_t>(D));
        coords_.resize(static_cast<std::size_t>(D));
        stride_.assign(static_cast<std::size_t>(D), 1);
        total_ = 1;
        for (int a = 0; a < D; ++a) {
            const auto& b = *domain_.bounds[static_cast<std::size_t>(a)];
            const int n = npts_[static_cast<std::size_t>(a)];
            const double h = (b.second - b.first) / static_cast<double>(n - 1);
            spacing_[static_cast<std::size_t>(a)] = h;
            auto& c = coords_[static_cast<std::size_t>(a)];
            c.resize(static_cast<std::size_t>(n));
            for (int k = 0; k < n; ++k) c[static_cast<std::size_t>(k)] = b.first + h * k;
            c.back() = b.second;
            total_ *= static_cast<std::size_t>(n);
        }
        for (int a = D - 2; a >= 0; --a)
            stride_[static_cast<std::size_t>(a)] =
                stride_[static_cast<std::size_t>(a + 1)] *
                static_cast<std::size_t>(npts_[static_cast<std::size_t>(a + 1)]);

        interior_.assign(total_, 0);
        weight_.assign(total_, 0.0);
        fill_positions();

        interior_count_ = 0;
        std::vector<int> multi(static_cast<std::size_t>(D), 0);
        std::vector<double> x(static_cast<std::size_t>(D));
        for (std::size_t p = 0; p < total_; ++p) {
            double w = 1.0;
            bool boundary = false;
            std::size_t rest = p;
            for (int a = 0; a < D; ++a) {
                const int k = static_cast<int>(rest / stride_[static_cast<std::size_t>(a)]);
                rest %= stride_[static_cast<std::size_t>(a)];
                const int n = npts_[static_cast<std::size_t>(a)];
                const bool edge = (k == 0 || k == n - 1);
                boundary = boundary || edge;
                w *= spacing_[static_cast<std::size_t>(a)] * (edge ? 0.5 : 1.0);
                x[static_cast<std::size_t>(a)] = coords_[static_cast<std::size_t>(a)]
                                                        [static_cast<std::size_t>(k)];
            }
            weight_[p] = w;
            bool inside = !boundary;
            if (inside && !domain_.excluded.empty()) {
                for (const auto& hole : domain_.excluded) {
                    bool in_hole = true;
                    for (int a = 0; a < D; ++a) {
                        const double tol = 1e-12 * spacing_[static_cast<std::size_t>(a)];
                        if (x[static_cast<std::size_t>(a)] <
                                hole.lower[static_cast<std::size_t>(a)] - tol ||
                            x[static_cast<std::size_t>(a)] >
                                hole.upper[static_cast<std::size_t>(a)] + tol) {
                            in_hole = false;
                            break;
                        }
                    }
                    if (in_hole) {
                        inside = false;
                        break;
                    }
                }
            }
            interior_[p] = inside ? 1 : 0;
            if (inside) ++interior_count_;
        }
    }

    void fill_positions() {
        rsq_.assign(total_, 0.0);
        for (std::size_t p = 0; p < total_; ++p) {
            double r2 = 0.0;
            std::size_t rest = p;
            for (int a = 0; a < dim(); ++a) {
                const std::size_t k = rest / stride_[static_cast<std::size_t>(a)];
                rest %= stride_[static_cast<std::size_t>(a)];
                const double xa = coords_[static_cast<std::size_t>(a)][k];
                r2 += xa * xa;
            }
            rsq_[p] = r2;
        }
    }

    DomainSpec domain_;
    std::vector<int> npts_;
    std::vector<double> spacing_;
    std::vector<std::vector<double>> coords_;
    std::vector<std::size_t> stride_;
    std::vector<std::uint8_t> interior_;
    std::vector<double> weight_;
    std::vector<double> rsq_;
    std::size_t total_ = 0;
    std::size_t interior_count_ = 0;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Builds the uniform grid for a (bounded) domain spec.
inline GridPtr build_grid(const DomainSpec& spec, std::vector<int> nodes_per_axis) {
    return std::make_shared<const Grid>(spec, std::move(nodes_per_axis));
}

/// Structural equality of grids (same boxes, node counts and coordinates).
inline bool same_grid(const Grid& a, const Grid& b) {
    if (&a == &b) return true;
    if (a.dim() != b.dim() || a.npts() != b.npts()) return false;
    return a.coords() == b.coords();
}

} // namespace crlab
