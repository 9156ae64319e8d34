#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crlab/numerics.hpp"

namespace crlab {

/// Axis-aligned sub-box carved out of an enclosing box (e.g. to build
/// L-shaped rooms). Closed region: grid nodes on its surface are treated
/// as wall nodes.
struct SubBox {
    std::vector<double> lower;
    std::vector<double> upper;
};

/// Declarative geometry of the region the density lives on.
///
/// Three kinds are supported:
///   box        - per-axis intervals; an axis with absent bounds is unbounded
///                (full line), e.g. all-absent bounds describe R^D;
///   halfspace  - one axis constrained to one side of an offset, every other
///                axis unbounded;
///   masked-box - a bounded box minus a list of excluded sub-boxes.
///
/// Unbounded axes must be truncated (see truncate_unbounded) before a grid
/// can be built.
struct DomainSpec {
    enum class Kind { Box, Halfspace, MaskedBox };

    int dimension = 0;
    Kind kind = Kind::Box;

    /// Per-axis (lower, upper); nullopt = unbounded axis. Used by Box and
    /// MaskedBox; ignored for Halfspace.
    std::vector<std::optional<std::pair<double, double>>> bounds;

    // Halfspace data: { x : sign * (x[axis] - offset) > 0 }.
    int halfspace_axis = -1;
    int halfspace_sign = +1;
    double halfspace_offset = 0.0;

    std::vector<SubBox> excluded;

    /// Axes that were unbounded before truncation; set by truncate_unbounded.
    std::vector<int> truncated_axes;

    static DomainSpec box(std::vector<std::pair<double, double>> axis_bounds) {
        DomainSpec s;
        s.dimension = static_cast<int>(axis_bounds.size());
        s.kind = Kind::Box;
        for (auto& b : axis_bounds) s.bounds.emplace_back(b);
        s.validate();
        return s;
    }

    static DomainSpec halfspace(int dimension, int axis, int sign, double offset) {
        DomainSpec s;
        s.dimension = dimension;
        s.kind = Kind::Halfspace;
        s.halfspace_axis = axis;
        s.halfspace_sign = sign;
        s.halfspace_offset = offset;
        s.bounds.assign(static_cast<std::size_t>(dimension), std::nullopt);
        s.validate();
        return s;
    }

    static DomainSpec masked_box(std::vector<std::pair<double, double>> axis_bounds,
                                 std::vector<SubBox> holes) {
        DomainSpec s = box(std::move(axis_bounds));
        s.kind = Kind::MaskedBox;
        s.excluded = std::move(holes);
        s.validate();
        return s;
    }

    bool axis_bounded(int axis) const {
        if (kind == Kind::Halfspace) return false; // one-sided is still unbounded
        return bounds[static_cast<std::size_t>(axis)].has_value();
    }

    bool bounded() const {
        for (int i = 0; i < dimension; ++i)
            if (!axis_bounded(i)) return false;
        return true;
    }

    bool was_truncated() const { return !truncated_axes.empty(); }

    void validate() const {
        if (dimension < 1) throw ValidationError("domain dimension must be >= 1");
        if (static_cast<int>(bounds.size()) != dimension)
            throw ValidationError("domain bounds list does not match dimension");
        if (kind == Kind::Halfspace) {
            if (halfspace_axis < 0 || halfspace_axis >= dimension)
                throw ValidationError("halfspace axis out of range");
            if (halfspace_sign != +1 && halfspace_sign != -1)
                throw ValidationError("halfspace sign must be +1 or -1");
            if (!excluded.empty())
                throw ValidationError("halfspace domains do not support exclusions");
            return;
        }
        for (int i = 0; i < dimension; ++i) {
            const auto& b = bounds[static_cast<std::size_t>(i)];
            if (b && !(b->first < b->second))
                throw ValidationError("axis " + std::to_string(i) +
                                      ": lower bound must be below upper bound");
        }
        if (kind == Kind::Box && !excluded.empty())
            throw ValidationError("box domains do not carry exclusions; use masked-box");
        for (const auto& hole : excluded) {
            if (static_cast<int>(hole.lower.size()) != dimension ||
                static_cast<int>(hole.upper.size()) != dimension)
                throw ValidationError("excluded sub-box dimension mismatch");
            for (int i = 0; i < dimension; ++i) {
                if (!(hole.lower[static_cast<std::size_t>(i)] <
                      hole.upper[static_cast<std::size_t>(i)]))
                    throw ValidationError("excluded sub-box has empty extent");
                const auto& b = bounds[static_cast<std::size_t>(i)];
                if (!b) throw ValidationError("excluded sub-box on unbounded axis");
                const double tol = 1e-12 * (b->second - b->first);
                if (hole.lower[static_cast<std::size_t>(i)] < b->first - tol ||
                    hole.upper[static_cast<std::size_t>(i)] > b->second + tol)
                    throw ValidationError("excluded sub-box lies outside the enclosing box");
            }
        }
    }
};

namespace detail {

/// Width constant c(tol) of the truncation rule: solves
///   integral_c^inf exp(-s^2/4) ds = tol,
/// i.e. sqrt(pi) * erfc(c/2) = tol, by bisection (erfc is monotone).
inline double truncation_constant(double tail_tol) {
    const double sqrt_pi = std::sqrt(M_PI);
    double lo = 0.0, hi = 60.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (sqrt_pi * std::erfc(0.5 * mid) > tail_tol)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

/// Replaces every unbounded axis of `spec` by a finite interval sized from
/// the Gaussian decay of the beta-confined ground state. Each unbounded axis
/// becomes [-L, L]; a halfspace axis becomes [offset, offset + L] (sign +1)
/// or [offset - L, offset] (sign -1), with
///   L = c(tail_tol) * beta^(-1/4).
/// The width constant c solves integral_c^inf exp(-s^2/4) ds = tail_tol, so
/// the amplitude envelope exp(-sqrt(beta) x^2 / 4) carries less than
/// tail_tol of unnormalized tail beyond the cut; the ground density itself
/// decays twice as fast and keeps far less. L scales exactly as beta^(-1/4).
inline DomainSpec truncate_unbounded(const DomainSpec& spec, double beta, double tail_tol) {
    spec.validate();
    if (spec.bounded())
        throw ValidationError("truncate_unbounded: domain has no unbounded axis");
    if (!(beta > 0.0))
        throw ValidationError("harmonic confinement requires positive beta");
    if (!(tail_tol > 0.0) || !(tail_tol < 1e-2))
        throw ValidationError("tail_tol must lie in (0, 1e-2)");

    const double len = detail::truncation_constant(tail_tol) * std::pow(beta, -0.25);

    DomainSpec out = spec;
    out.kind = spec.excluded.empty() ? DomainSpec::Kind::Box : DomainSpec::Kind::MaskedBox;
    out.truncated_axes.clear();
    for (int i = 0; i < spec.dimension; ++i) {
        if (spec.axis_bounded(i)) continue;
        out.truncated_axes.push_back(i);
        if (spec.kind == DomainSpec::Kind::Halfspace && i == spec.halfspace_axis) {
            const double off = spec.halfspace_offset;
            out.bounds[static_cast<std::size_t>(i)] =
                spec.halfspace_sign > 0 ? std::make_pair(off, off + len)
                                        : std::make_pair(off - len, off);
        } else {
            out.bounds[static_cast<std::size_t>(i)] = std::make_pair(-len, len);
        }
    }
    out.halfspace_axis = -1;
    out.halfspace_sign = +1;
    out.halfspace_offset = 0.0;
    out.validate();
    return out;
}

} // namespace crlab
