#include <catch2/catch.hpp>

#include <cmath>
#include <numbers>

#include "crlab/minimizer.hpp"
#include "crlab/oracles.hpp"
#include "support/random_fields.hpp"

using namespace crlab;

namespace {

constexpr double kPi = std::numbers::pi;

GridPtr rectangle_grid(int nx, int ny) {
    return build_grid(DomainSpec::box({{0.0, 2.0}, {-1.0, 2.0}}), {nx, ny});
}

GridField uniform_density(const GridPtr& grid) {
    return normalize(sample_field(grid, [](const std::vector<double>&) { return 1.0; }));
}

double l2_distance(const GridField& a, const GridField& b) {
    double acc = 0.0;
    for (std::size_t p = 0; p < a.u.size(); ++p) {
        const double d = a.u[p] - b.u[p];
        acc += a.grid->weight(p) * d * d;
    }
    return std::sqrt(acc);
}

} // namespace

TEST_CASE("well ground state carries the bounded Fisher minimum", "[minimizer]") {
    auto grid = rectangle_grid(64, 96);
    MinimizeResult r = min_fisher_bounded(grid);
    CHECK(r.beta == 0.0);
    CHECK(r.fisher == Approx(13.0 * kPi * kPi / 9.0).epsilon(1e-2));
    CHECK(r.variance == Approx(7.0 / 3.0 - 13.0 / (2.0 * kPi * kPi)).epsilon(1e-2));
}

TEST_CASE("multiplier sign tracks the variance target", "[minimizer]") {
    auto grid = rectangle_grid(48, 72);
    const double pivot = min_fisher_bounded(grid).variance;
    const double threshold = 1e-6 / std::pow(grid->diameter(), 4);

    MinimizeResult at = min_fisher_at_variance(grid, pivot);
    CHECK(std::abs(at.beta) <= threshold);
    CHECK(at.variance == Approx(pivot).epsilon(1e-7));

    MinimizeResult below = min_fisher_at_variance(grid, 0.9 * pivot);
    CHECK(below.beta > 0.0);
    CHECK(below.variance == Approx(0.9 * pivot).epsilon(1e-7));
    CHECK(below.fisher > min_fisher_bounded(grid).fisher);

    MinimizeResult above = min_fisher_at_variance(grid, 1.1 * pivot);
    CHECK(above.beta < 0.0);
    CHECK(above.variance == Approx(1.1 * pivot).epsilon(1e-7));
}

TEST_CASE("unreachable variance targets are rejected with the range", "[minimizer]") {
    auto grid = rectangle_grid(32, 48);
    CHECK_THROWS_AS(min_fisher_at_variance(grid, -1.0), ValidationError);
    CHECK_THROWS_WITH(min_fisher_at_variance(grid, 1e6),
                      Catch::Contains("attainable range"));
}

TEST_CASE("beta scan is consistent and monotone", "[minimizer]") {
    auto grid = rectangle_grid(48, 72);
    const auto pts = variance_of_beta_curve(grid, {-20.0, -5.0, 0.0, 5.0, 20.0});
    REQUIRE(pts.size() == 5);
    for (const auto& p : pts) CHECK(p.ok);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        CHECK(pts[i].variance > pts[i + 1].variance);

    // the beta = 0 entry reproduces the well minimum (warm-started solve,
    // so agreement is at solver tolerance rather than bitwise)
    MinimizeResult well = min_fisher_bounded(grid);
    CHECK(pts[2].variance == Approx(well.variance).epsilon(1e-7));
    CHECK(pts[2].fisher == Approx(well.fisher).epsilon(1e-7));
    // strong confinement squeezes the variance below the well value
    CHECK(pts[4].variance < well.variance);
}

TEST_CASE("beta scan satisfies the confinement identity on a far-wall grid",
          "[minimizer]") {
    auto spec = truncate_unbounded(DomainSpec::halfspace(2, 0, +1, 0.0), 0.5, 1e-10);
    auto grid = build_grid(spec, {192, 192});
    const auto pts = variance_of_beta_curve(grid, {0.5, 1.0, 2.0});
    for (const auto& p : pts) {
        REQUIRE(p.ok);
        const double defect = std::abs(p.energy * p.energy -
                                       p.beta / 16.0 * p.fisher * p.variance) /
                              (p.energy * p.energy);
        CHECK(defect < 5e-3);
    }
}

TEST_CASE("projected gradient reaches the well ground state", "[minimizer]") {
    auto grid = rectangle_grid(48, 72);
    MinimizeResult ref = min_fisher_bounded(grid);
    MinimizeResult pg =
        projected_gradient_min(grid, ref.variance, uniform_density(grid), 0.0, 30000);
    CHECK(l2_distance(pg.field, ref.field) < 1e-2);
    CHECK(pg.fisher == Approx(ref.fisher).epsilon(1e-2));
    CHECK(std::abs(pg.variance - ref.variance) / ref.variance < 1e-6);
    // trace is nonincreasing after projection steps
    for (std::size_t i = 0; i + 1 < pg.trace.size(); ++i)
        CHECK(pg.trace[i + 1][1] <= pg.trace[i][1] * (1.0 + 1e-10));
}

TEST_CASE("projected gradient is stationary at the optimum", "[minimizer]") {
    auto grid = rectangle_grid(48, 72);
    MinimizeResult ref = min_fisher_bounded(grid);
    MinimizeResult pg =
        projected_gradient_min(grid, ref.variance, ref.field, 0.0, 100);
    CHECK(pg.fisher == Approx(ref.fisher).epsilon(1e-8));
}

TEST_CASE("constrained optimum dominates the global well minimum", "[minimizer]") {
    auto grid = rectangle_grid(48, 72);
    MinimizeResult well = min_fisher_bounded(grid);
    MinimizeResult pg = projected_gradient_min(grid, 0.9 * well.variance,
                                               uniform_density(grid), 0.0, 30000);
    CHECK(pg.fisher > well.fisher);
}

TEST_CASE("projected gradient validates its starting point", "[minimizer]") {
    auto grid = rectangle_grid(32, 48);
    GridField raw(grid);
    for (std::size_t p = 0; p < grid->size(); ++p)
        if (grid->interior(p)) raw.u[p] = 1.0;
    CHECK_THROWS_AS(projected_gradient_min(grid, 1.0, raw, 0.0, 10), ValidationError);

    GridField signed_init = normalize(sample_field(grid, [](const std::vector<double>& x) {
        return x[0] - 1.0; // changes sign inside the domain
    }));
    CHECK_THROWS_AS(projected_gradient_min(grid, 1.0, signed_init, 0.0, 10),
                    ValidationError);
}

TEST_CASE("optimal product on the far-wall grid is scale invariant", "[minimizer]") {
    auto spec = truncate_unbounded(DomainSpec::halfspace(2, 0, +1, 0.0), 1.0, 1e-12);
    auto grid = build_grid(spec, {128, 128});
    MinimizeResult a = min_fisher_at_variance(grid, 4.0);  // beta near 1
    MinimizeResult b = min_fisher_at_variance(grid, 16.0); // beta near 1/16
    const double pa = a.fisher * a.variance;
    const double pb = b.fisher * b.variance;
    CHECK(pa == Approx(pb).epsilon(5e-3));
    CHECK(pa == Approx(16.0).epsilon(2e-2));
    CHECK(a.beta == Approx(1.0).epsilon(0.05));
    CHECK(b.beta == Approx(1.0 / 16.0).epsilon(0.05));
}

TEST_CASE("L-shaped well minimum dominates random densities", "[minimizer]") {
    auto grid = build_grid(
        DomainSpec::masked_box({{0.0, 1.0}, {0.0, 1.0}}, {{{0.5, 0.5}, {1.0, 1.0}}}),
        {65, 65});
    MinimizeResult well = min_fisher_bounded(grid);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        GridField trial = testsupport::random_smooth_field(grid, 900 + seed);
        CHECK(fisher_information(trial) >= well.fisher * (1.0 - 5e-3));
    }
}
