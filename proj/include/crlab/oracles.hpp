#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "crlab/functionals.hpp"
#include "crlab/numerics.hpp"

namespace crlab {

/// Hermite polynomial H_n(x), physicists' convention, via the three-term
/// recurrence H_{n+1} = 2 x H_n - 2 n H_{n-1}. Degrees above 60 are
/// rejected; the recurrence amplitudes overflow doubles beyond that range
/// once the normalization factorials enter.
inline double hermite(int n, double x) {
    if (n < 0) throw ValidationError("hermite: degree must be nonnegative");
    if (n > 60) throw ValidationError("degree out of supported range");
    double prev = 1.0; // H_0
    if (n == 0) return prev;
    double curr = 2.0 * x; // H_1
    for (int k = 1; k < n; ++k) {
        const double next = 2.0 * x * curr - 2.0 * k * prev;
        prev = curr;
        curr = next;
    }
    return curr;
}

namespace detail {
inline double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}
} // namespace detail

/// Closed-form scalars attached to an analytic state: its energy plus the
/// usual density functionals.
struct OracleReport {
    double energy = 0.0;
    FunctionalReport report;
};

/// Eigenstate family of the harmonic confinement on the positive half-plane
/// {(x, y) : x > 0}. Quantum numbers n1 (odd x-excitations) and n2; beta is
/// the confinement strength (length^-4), acting on the density purely as a
/// scale factor.
struct OscillatorHalfPlaneState {
    int n1 = 0;
    int n2 = 0;
    double beta = 1.0;

    OscillatorHalfPlaneState(int n1_, int n2_, double beta_) : n1(n1_), n2(n2_), beta(beta_) {
        if (n1 < 0 || n2 < 0)
            throw ValidationError("half-plane state: quantum numbers must be nonnegative");
        if (2 * n1 + 1 > 60 || n2 > 60)
            throw ValidationError("degree out of supported range");
        if (!(beta > 0.0)) throw ValidationError("harmonic confinement requires positive beta");
    }

    int level() const { return 2 * n1 + n2 + 2; }
};

/// Normalized amplitude u_{n1,n2}(x, y); zero for x < 0 and on the wall
/// x = 0. Odd Hermite in x enforces the wall condition, a Gaussian envelope
/// exp(-sqrt(beta) (x^2+y^2) / 4) carries the decay.
inline double halfplane_amplitude(const OscillatorHalfPlaneState& s, double x, double y) {
    if (x < 0.0) return 0.0;
    const double sb = std::sqrt(s.beta);
    const double norm_sq = std::pow(2.0, -2.0 * s.n1 - s.n2 - 1.0) * sb /
                           (std::numbers::pi * detail::factorial(2 * s.n1 + 1) *
                            detail::factorial(s.n2));
    const double xi = std::pow(s.beta, 0.25) / std::sqrt(2.0);
    return std::sqrt(norm_sq) * std::exp(-0.25 * sb * (x * x + y * y)) *
           hermite(2 * s.n1 + 1, xi * x) * hermite(s.n2, xi * y);
}

/// Closed-form energy, variance, Fisher information and Cramer-Rao product
/// of a half-plane state:
///   E = (sqrt(beta)/2) (2 n1 + n2 + 2)
///   <x^2+y^2> = (2/sqrt(beta)) (2 n1 + n2 + 2)
///   F = 2 sqrt(beta) (2 n1 + n2 + 2)
///   F <x^2+y^2> = 4 (2 n1 + n2 + 2)^2   (beta-independent)
inline OracleReport halfplane_report(const OscillatorHalfPlaneState& s) {
    const double sb = std::sqrt(s.beta);
    const double k = static_cast<double>(s.level());
    OracleReport out;
    out.energy = 0.5 * sb * k;
    out.report.normalization = 1.0;
    out.report.variance = 2.0 / sb * k;
    out.report.fisher = 2.0 * sb * k;
    out.report.cr_product = 4.0 * k * k;
    return out;
}

/// Eigenstate of the infinite well on an axis-aligned D-box: per-axis
/// bounds [a_i, b_i] and quantum numbers n_i >= 1.
struct BoxState {
    std::vector<std::pair<double, double>> bounds;
    std::vector<int> n;

    BoxState(std::vector<std::pair<double, double>> bounds_, std::vector<int> n_)
        : bounds(std::move(bounds_)), n(std::move(n_)) {
        if (bounds.empty() || bounds.size() != n.size())
            throw ValidationError("box state: bounds and quantum numbers must match");
        for (const auto& b : bounds)
            if (!(b.first < b.second)) throw ValidationError("box state: empty axis");
        for (int q : n)
            if (q < 1) throw ValidationError("box state: quantum numbers start at 1");
    }

    int dim() const { return static_cast<int>(bounds.size()); }
};

/// Product-of-sines amplitude, sqrt(2/L_i) sin(n_i pi (x_i - a_i) / L_i)
/// per axis; zero on and outside the walls.
inline double box_amplitude(const BoxState& s, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != s.dim())
        throw ValidationError("box amplitude: point dimension mismatch");
    double val = 1.0;
    for (int a = 0; a < s.dim(); ++a) {
        const double lo = s.bounds[static_cast<std::size_t>(a)].first;
        const double hi = s.bounds[static_cast<std::size_t>(a)].second;
        const double len = hi - lo;
        const double xa = x[static_cast<std::size_t>(a)];
        if (xa <= lo || xa >= hi) return 0.0;
        val *= std::sqrt(2.0 / len) *
               std::sin(s.n[static_cast<std::size_t>(a)] * std::numbers::pi * (xa - lo) / len);
    }
    return val;
}

/// Closed-form report for a box state:
///   E = sum_i n_i^2 pi^2 / (2 L_i^2),   F = 8 E  (zero potential),
///   <x_i^2> = a_i^2 + a_i L_i + L_i^2/3 - L_i^2 / (2 n_i^2 pi^2).
inline OracleReport box_report(const BoxState& s) {
    const double pi = std::numbers::pi;
    OracleReport out;
    double energy = 0.0;
    double var = 0.0;
    for (int a = 0; a < s.dim(); ++a) {
        const double lo = s.bounds[static_cast<std::size_t>(a)].first;
        const double len = s.bounds[static_cast<std::size_t>(a)].second - lo;
        const double q = static_cast<double>(s.n[static_cast<std::size_t>(a)]);
        energy += q * q * pi * pi / (2.0 * len * len);
        var += lo * lo + lo * len + len * len / 3.0 - len * len / (2.0 * q * q * pi * pi);
    }
    out.energy = energy;
    out.report.normalization = 1.0;
    out.report.variance = var;
    out.report.fisher = 8.0 * energy;
    out.report.cr_product = out.report.fisher * var;
    return out;
}

} // namespace crlab
