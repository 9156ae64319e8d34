#pragma once

#include <filesystem>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "crlab/config.hpp"
#include "crlab/eigensolver.hpp"
#include "crlab/functionals.hpp"
#include "crlab/io.hpp"
#include "crlab/minimizer.hpp"
#include "crlab/oracles.hpp"

namespace crlab {

namespace detail {

inline GridPtr grid_from_config(const RunConfig& cfg) {
    DomainSpec spec = cfg.make_domain();
    if (!spec.bounded()) spec = truncate_unbounded(spec, cfg.beta, cfg.tail_tol);
    std::vector<int> res = cfg.resolution;
    if (res.empty()) res.assign(static_cast<std::size_t>(spec.dimension), 128);
    if (res.size() == 1 && spec.dimension > 1)
        res.assign(static_cast<std::size_t>(spec.dimension), res[0]);
    return build_grid(spec, res);
}

inline void write_field(const std::filesystem::path& dir, const std::string& name,
                        const GridField& field) {
    std::filesystem::create_directories(dir / "fields");
    atomic_write_file(dir / "fields" / (name + ".csv"), dump_field_csv(field));
}

inline void write_diagnostics(const std::filesystem::path& dir, const EigenSolution& sol) {
    std::ostringstream os;
    for (const auto& [it, res] : sol.residual_history)
        os << "{\"iteration\": " << it << ", \"residual\": " << format_double(res) << "}\n";
    atomic_write_file(dir / "diagnostics.jsonl", os.str());
}

inline void run_functionals(const RunConfig& cfg, const std::filesystem::path& dir) {
    if (cfg.density_csv.empty())
        throw ValidationError("functionals needs functionals.density_csv");
    GridField field = ingest_density(std::filesystem::path(cfg.density_csv));
    FlatReport report;
    add_report(report, "", cramer_rao_product(field));
    atomic_write_file(dir / "report.json", report.to_json());
    if (cfg.dump_fields) write_field(dir, "density", field);
}

inline void run_oracle(const RunConfig& cfg, const std::filesystem::path& dir) {
    FlatReport report;
    GridField sampled;
    if (cfg.oracle_family == "halfplane") {
        if (cfg.oracle_n.size() != 2)
            throw ValidationError("oracle.n must hold two quantum numbers for halfplane");
        OscillatorHalfPlaneState st(cfg.oracle_n[0], cfg.oracle_n[1], cfg.beta);
        OracleReport r = halfplane_report(st);
        report.add("energy", r.energy);
        add_report(report, "", r.report);
        if (cfg.dump_fields) {
            RunConfig hp = cfg;
            hp.domain_kind = "halfspace";
            GridPtr grid = grid_from_config(hp);
            sampled = normalize(sample_field(grid, [&](const std::vector<double>& x) {
                return halfplane_amplitude(st, x[0], x[1]);
            }));
        }
    } else if (cfg.oracle_family == "box") {
        DomainSpec spec = cfg.make_domain();
        if (spec.kind != DomainSpec::Kind::Box || !spec.bounded())
            throw ValidationError("box oracle requires a bounded box domain");
        std::vector<std::pair<double, double>> bounds;
        for (const auto& b : spec.bounds) bounds.push_back(*b);
        if (cfg.oracle_n.size() != static_cast<std::size_t>(spec.dimension))
            throw ValidationError("oracle.n must match domain.dimension for box");
        BoxState st(bounds, cfg.oracle_n);
        OracleReport r = box_report(st);
        report.add("energy", r.energy);
        add_report(report, "", r.report);
        if (cfg.dump_fields) {
            GridPtr grid = grid_from_config(cfg);
            sampled = normalize(sample_field(
                grid, [&](const std::vector<double>& x) { return box_amplitude(st, x); }));
        }
    } else {
        throw ValidationError("unknown oracle.family: " + cfg.oracle_family);
    }
    atomic_write_file(dir / "report.json", report.to_json());
    if (cfg.dump_fields) write_field(dir, "oracle", sampled);
}

inline void run_eigen(const RunConfig& cfg, const std::filesystem::path& dir) {
    GridPtr grid = grid_from_config(cfg);
    const auto kind = cfg.beta == 0.0 ? HamiltonianOperator::Potential::Zero
                                      : HamiltonianOperator::Potential::Harmonic;
    HamiltonianOperator op(grid, kind, cfg.beta);
    EigenSolution sol = ground_state(op, cfg.solver_tol, cfg.solver_max_iter, cfg.seed);
    FlatReport report;
    report.add("energy", sol.energy);
    report.add("residual", sol.residual);
    report.add("iterations", sol.iterations);
    add_report(report, "", cramer_rao_product(sol.field));
    if (cfg.beta > 0.0) report.add("virial_defect", virial_check(sol, cfg.beta));
    atomic_write_file(dir / "report.json", report.to_json());
    write_diagnostics(dir, sol);
    if (cfg.dump_fields) write_field(dir, "ground", sol.field);
}

inline void add_minimize_report(FlatReport& report, const MinimizeResult& r) {
    report.add("beta", r.beta);
    report.add("variance", r.variance);
    report.add("fisher", r.fisher);
    report.add("cr_product", r.fisher * r.variance);
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
        const std::string p = "trace." + std::to_string(i) + ".";
        report.add(p + "iterate", r.trace[i][0]);
        report.add(p + "fisher", r.trace[i][1]);
        report.add(p + "violation", r.trace[i][2]);
    }
}

inline void run_minimize(const RunConfig& cfg, const std::filesystem::path& dir) {
    GridPtr grid = grid_from_config(cfg);
    MinimizeOptions opts;
    opts.eigen_tol = cfg.solver_tol;
    opts.eigen_max_iter = cfg.solver_max_iter;
    opts.seed = cfg.seed;
    MinimizeResult result;
    if (cfg.target_variance <= 0.0) {
        result = min_fisher_bounded(grid, opts);
    } else if (cfg.minimize_algorithm == "bisect") {
        result = min_fisher_at_variance(grid, cfg.target_variance, opts);
    } else if (cfg.minimize_algorithm == "projected-gradient") {
        GridField init = normalize(sample_field(grid, [](const std::vector<double>&) {
            return 1.0;
        }));
        result = projected_gradient_min(grid, cfg.target_variance, init, cfg.pg_step,
                                        cfg.pg_iters);
    } else {
        throw ValidationError("unknown minimize.algorithm: " + cfg.minimize_algorithm);
    }
    FlatReport report;
    add_minimize_report(report, result);
    atomic_write_file(dir / "report.json", report.to_json());
    write_field(dir, "optimal", result.field); // companion CSV always
}

inline void run_curve(const RunConfig& cfg, const std::filesystem::path& dir) {
    if (cfg.curve_betas.empty()) throw ValidationError("curve needs curve.betas");
    GridPtr grid = grid_from_config(cfg);
    MinimizeOptions opts;
    opts.eigen_tol = cfg.solver_tol;
    opts.eigen_max_iter = cfg.solver_max_iter;
    opts.seed = cfg.seed;
    const auto pts = variance_of_beta_curve(grid, cfg.curve_betas, opts);
    FlatReport report;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::string p = "curve." + std::to_string(i) + ".";
        report.add(p + "beta", pts[i].beta);
        report.add(p + "ok", pts[i].ok ? 1.0 : 0.0);
        if (pts[i].ok) {
            report.add(p + "variance", pts[i].variance);
            report.add(p + "fisher", pts[i].fisher);
            report.add(p + "energy", pts[i].energy);
        }
    }
    atomic_write_file(dir / "report.json", report.to_json());
}

inline void run_verify(const RunConfig& cfg, const std::filesystem::path& dir) {
    const double pi = std::numbers::pi;
    FlatReport t;

    // closed-form half-plane benchmarks
    OscillatorHalfPlaneState ground(0, 0, cfg.beta > 0.0 ? cfg.beta : 1.0);
    OracleReport g = halfplane_report(ground);
    t.add("example1.energy.ground", g.energy);
    t.add("example1.variance.ground", g.report.variance);
    t.add("example1.fisher.ground", g.report.fisher);
    t.add("example1.product.ground", g.report.cr_product);
    t.add("example1.product.n1_1_n2_0",
          halfplane_report(OscillatorHalfPlaneState(1, 0, ground.beta)).report.cr_product);
    t.add("example1.virial.defect",
          std::abs(g.energy * g.energy -
                   ground.beta / 16.0 * g.report.fisher * g.report.variance));
    double invariance_dev = 0.0;
    for (double b : {0.25, 1.0, 4.0, 16.0}) {
        const double p = halfplane_report(OscillatorHalfPlaneState(0, 0, b)).report.cr_product;
        invariance_dev = std::max(invariance_dev, std::abs(p - 16.0));
    }
    t.add("example1.product.beta_invariance_dev", invariance_dev);

    // closed-form rectangle-well benchmarks
    BoxState rect({{0.0, 2.0}, {-1.0, 2.0}}, {1, 1});
    OracleReport b = box_report(rect);
    t.add("example2.energy.ground", b.energy);
    t.add("example2.fisher.ground", b.report.fisher);
    t.add("example2.variance.ground", b.report.variance);
    t.add("example2.product.ground", b.report.cr_product);
    t.add("example2.fisher.ground.reference", 13.0 * pi * pi / 9.0);

    // grid reproduction, half-plane
    {
        RunConfig hp = cfg;
        hp.domain_kind = "halfspace";
        hp.halfspace_axis = 0;
        hp.halfspace_sign = +1;
        hp.halfspace_offset = 0.0;
        hp.dimension = 2;
        hp.beta = ground.beta;
        GridPtr grid = grid_from_config(hp);
        GridField f = normalize(sample_field(grid, [&](const std::vector<double>& x) {
            return halfplane_amplitude(ground, x[0], x[1]);
        }));
        FunctionalReport fr = cramer_rao_product(f);
        t.add("example1.grid.variance", fr.variance);
        t.add("example1.grid.fisher", fr.fisher);
        t.add("example1.grid.product", fr.cr_product);
        HamiltonianOperator op(grid, HamiltonianOperator::Potential::Harmonic, ground.beta);
        EigenSolution sol = ground_state(op, cfg.solver_tol, cfg.solver_max_iter, cfg.seed);
        t.add("example1.grid.energy", sol.energy);
        t.add("example1.grid.virial_defect", virial_check(sol, ground.beta));
    }

    // grid reproduction, rectangle well
    {
        DomainSpec spec = DomainSpec::box({{0.0, 2.0}, {-1.0, 2.0}});
        std::vector<int> res = cfg.resolution;
        if (res.empty()) res = {128, 192};
        if (res.size() == 1) res = {res[0], res[0] * 3 / 2};
        GridPtr grid = build_grid(spec, res);
        HamiltonianOperator op(grid, HamiltonianOperator::Potential::Zero, 0.0);
        EigenSolution sol = ground_state(op, cfg.solver_tol, cfg.solver_max_iter, cfg.seed);
        FunctionalReport fr = cramer_rao_product(sol.field);
        t.add("example2.grid.energy", sol.energy);
        t.add("example2.grid.fisher", fr.fisher);
        t.add("example2.grid.variance", fr.variance);
        t.add("example2.grid.product", fr.cr_product);
    }

    atomic_write_file(dir / "report.json", t.to_json());
}

} // namespace detail

/// Executes one configured operation. Artifacts land in cfg.out_dir
/// (report.json, config_resolved.txt, optional CSV field dumps and solver
/// diagnostics). Returns the process exit status: 0 success, 1 invalid
/// configuration or input, 2 numerical failure.
inline int run(const RunConfig& cfg) {
    try {
        cfg.validate();
        const std::filesystem::path dir = cfg.out_dir;
        std::filesystem::create_directories(dir);
        if (!cfg.source_path.empty() && std::filesystem::exists(cfg.source_path))
            std::filesystem::copy_file(cfg.source_path, dir / "config.txt",
                                       std::filesystem::copy_options::overwrite_existing);
        atomic_write_file(dir / "config_resolved.txt", render_config(cfg));

        if (cfg.op == "functionals") detail::run_functionals(cfg, dir);
        else if (cfg.op == "oracle") detail::run_oracle(cfg, dir);
        else if (cfg.op == "eigen") detail::run_eigen(cfg, dir);
        else if (cfg.op == "minimize") detail::run_minimize(cfg, dir);
        else if (cfg.op == "curve") detail::run_curve(cfg, dir);
        else if (cfg.op == "verify") detail::run_verify(cfg, dir);
        else throw ValidationError("unknown operation: " + cfg.op);
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << " (artifacts in " << cfg.out_dir
                  << ")\n";
        return 2;
    }
}

} // namespace crlab
