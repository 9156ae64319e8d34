// crlab command-line front end: computes Fisher information, variance and
// Cramer-Rao products of gridded densities, solves confined ground states,
// runs constrained Fisher minimization and emits a benchmark verification
// table. See README.md for the config file schema.

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "crlab/cli.hpp"

namespace {

struct FlagOverrides {
    std::string config_path;
    std::string out_dir;
    std::string resolution;
    double beta = std::numeric_limits<double>::quiet_NaN();
    double target_variance = std::numeric_limits<double>::quiet_NaN();
    double tol = std::numeric_limits<double>::quiet_NaN();
    long long seed = -1;
    bool dump_fields = false;
};

void add_common_flags(CLI::App* cmd, FlagOverrides& f) {
    cmd->add_option("--config", f.config_path, "configuration file (key = value)");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--resolution", f.resolution, "nodes per axis, N or N,N,...");
    cmd->add_option("--beta", f.beta, "harmonic confinement strength (0 = infinite well)");
    cmd->add_option("--target-variance", f.target_variance, "variance constraint value");
    cmd->add_option("--tol", f.tol, "eigensolver residual tolerance");
    cmd->add_option("--seed", f.seed, "start-vector seed");
    cmd->add_flag("--dump-fields", f.dump_fields, "also write field CSV dumps");
}

std::vector<int> parse_resolution(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        char* end = nullptr;
        const long v = std::strtol(tok.c_str(), &end, 10);
        if (end == tok.c_str() || *end != '\0' || v < 1)
            throw crlab::ValidationError("bad --resolution value: " + s);
        out.push_back(static_cast<int>(v));
    }
    if (out.empty()) throw crlab::ValidationError("bad --resolution value: " + s);
    return out;
}

crlab::RunConfig assemble_config(const std::string& op, const FlagOverrides& f) {
    crlab::RunConfig cfg;
    if (!f.config_path.empty()) cfg = crlab::parse_config_file(f.config_path);
    cfg.op = op; // the subcommand always names the operation
    if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
    if (!f.resolution.empty()) cfg.resolution = parse_resolution(f.resolution);
    if (!std::isnan(f.beta)) cfg.beta = f.beta;
    if (!std::isnan(f.target_variance)) cfg.target_variance = f.target_variance;
    if (!std::isnan(f.tol)) cfg.solver_tol = f.tol;
    if (f.seed >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed);
    if (f.dump_fields) cfg.dump_fields = true;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fisher information and Cramer-Rao analysis of densities on "
                 "D-dimensional grids"};
    app.require_subcommand(1);

    FlagOverrides flags;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"functionals", "report for a density supplied as CSV"},
        {"oracle", "closed-form benchmark state report"},
        {"eigen", "ground state of the confined problem on a grid"},
        {"minimize", "minimal Fisher information at fixed variance"},
        {"curve", "ground-state scan over a list of beta values"},
        {"verify", "one-shot benchmark verification table"},
    };
    for (const auto& [name, desc] : commands) add_common_flags(app.add_subcommand(name, desc), flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const std::string op = app.get_subcommands().at(0)->get_name();
        return crlab::run(assemble_config(op, flags));
    } catch (const crlab::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
}
