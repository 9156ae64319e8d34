#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "crlab/domain.hpp"
#include "crlab/numerics.hpp"

namespace crlab {

/// Everything one run needs: the domain, the grid resolution, which
/// operation to perform and its parameters. Built from a key = value
/// config file plus command-line overrides (flags win).
struct RunConfig {
    std::string op; // functionals | oracle | eigen | minimize | curve | verify

    // domain
    std::string domain_kind = "box"; // box | halfspace | masked-box
    int dimension = 2;
    std::vector<double> lower, upper;
    int halfspace_axis = 0;
    int halfspace_sign = +1;
    double halfspace_offset = 0.0;
    std::vector<SubBox> excluded;

    std::vector<int> resolution;
    double tail_tol = 1e-10;

    double beta = 1.0;
    std::string oracle_family = "halfplane"; // halfplane | box
    std::vector<int> oracle_n;

    double target_variance = 0.0;
    std::string minimize_algorithm = "bisect"; // bisect | projected-gradient
    double pg_step = 0.0;                      // <= 0: automatic
    int pg_iters = 20000;

    std::vector<double> curve_betas;

    double solver_tol = 1e-8;
    int solver_max_iter = 400;

    std::string density_csv;
    std::string out_dir = "out";
    std::uint64_t seed = 42;
    bool dump_fields = false;

    std::string source_path; // config file this was read from, if any

    DomainSpec make_domain() const {
        if (domain_kind == "halfspace")
            return DomainSpec::halfspace(dimension, halfspace_axis, halfspace_sign,
                                         halfspace_offset);
        std::vector<std::pair<double, double>> bounds;
        if (lower.size() != upper.size())
            throw ValidationError("domain.lower and domain.upper differ in length");
        if (!lower.empty() && static_cast<int>(lower.size()) != dimension)
            throw ValidationError("domain bounds do not match domain.dimension");
        for (std::size_t a = 0; a < lower.size(); ++a) bounds.emplace_back(lower[a], upper[a]);
        if (domain_kind == "masked-box") return DomainSpec::masked_box(bounds, excluded);
        if (domain_kind == "box") return DomainSpec::box(bounds);
        throw ValidationError("unknown domain.kind: " + domain_kind);
    }

    void validate() const {
        if (!(tail_tol > 0.0)) throw ValidationError("truncation.tail_tol must be positive");
        if (!(solver_tol > 0.0)) throw ValidationError("solver.tol must be positive");
        if (solver_max_iter < 1) throw ValidationError("solver.max_iter must be >= 1");
        if (pg_iters < 1) throw ValidationError("minimize.iters must be >= 1");
    }
};

namespace detail {

struct ConfigValue {
    std::string raw;
    int line = 0;
    bool used = false;
};

inline std::vector<double> parse_number_array(const std::string& raw, const std::string& key) {
    std::string s = raw;
    if (s.size() < 2 || s.front() != '[' || s.back() != ']')
        throw ValidationError("config key " + key + ": expected [v, v, ...]");
    s = s.substr(1, s.size() - 2);
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const char* c = tok.c_str();
        char* end = nullptr;
        const double v = std::strtod(c, &end);
        while (end && *end == ' ') ++end;
        if (end == c || (end && *end != '\0'))
            throw ValidationError("config key " + key + ": bad number '" + tok + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ValidationError("config key " + key + ": empty array");
    return out;
}

inline double parse_number(const std::string& raw, const std::string& key) {
    char* end = nullptr;
    const double v = std::strtod(raw.c_str(), &end);
    if (end == raw.c_str() || *end != '\0')
        throw ValidationError("config key " + key + ": bad number '" + raw + "'");
    return v;
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

} // namespace detail

/// Parses the key = value configuration format:
///   - one `key = value` per line, '#' starts a comment
///   - arrays as [a, b, c]
///   - excluded sub-boxes as paired keys domain.exclude1.lower / .upper
/// Unknown keys are rejected by name.
inline RunConfig parse_config(std::istream& in, const std::string& source_name = "") {
    std::map<std::string, detail::ConfigValue> kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(line_no) +
                                  ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ValidationError("config line " + std::to_string(line_no) +
                                  ": expected key = value");
        if (kv.count(key))
            throw ValidationError("config key " + key + " given twice");
        kv[key] = {val, line_no, false};
    }

    RunConfig cfg;
    cfg.source_path = source_name;
    const auto take = [&](const std::string& key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        it->second.used = true;
        return it->second.raw;
    };

    if (auto v = take("op")) cfg.op = *v;
    if (auto v = take("out")) cfg.out_dir = *v;
    if (auto v = take("seed")) cfg.seed = static_cast<std::uint64_t>(
        detail::parse_number(*v, "seed"));
    if (auto v = take("dump_fields")) {
        if (*v == "true" || *v == "1") cfg.dump_fields = true;
        else if (*v == "false" || *v == "0") cfg.dump_fields = false;
        else throw ValidationError("config key dump_fields: expected true/false");
    }

    if (auto v = take("domain.kind")) cfg.domain_kind = *v;
    if (auto v = take("domain.dimension"))
        cfg.dimension = static_cast<int>(detail::parse_number(*v, "domain.dimension"));
    if (auto v = take("domain.lower")) cfg.lower = detail::parse_number_array(*v, "domain.lower");
    if (auto v = take("domain.upper")) cfg.upper = detail::parse_number_array(*v, "domain.upper");
    if (auto v = take("domain.halfspace.axis"))
        cfg.halfspace_axis = static_cast<int>(detail::parse_number(*v, "domain.halfspace.axis"));
    if (auto v = take("domain.halfspace.sign")) {
        if (*v == "+" || *v == "+1" || *v == "1") cfg.halfspace_sign = +1;
        else if (*v == "-" || *v == "-1") cfg.halfspace_sign = -1;
        else throw ValidationError("config key domain.halfspace.sign: expected + or -");
    }
    if (auto v = take("domain.halfspace.offset"))
        cfg.halfspace_offset = detail::parse_number(*v, "domain.halfspace.offset");
    for (int i = 1;; ++i) {
        const std::string klo = "domain.exclude" + std::to_string(i) + ".lower";
        const std::string khi = "domain.exclude" + std::to_string(i) + ".upper";
        auto lo = take(klo);
        auto hi = take(khi);
        if (!lo && !hi) break;
        if (!lo || !hi)
            throw ValidationError("config: " + klo + " and " + khi + " must come together");
        cfg.excluded.push_back({detail::parse_number_array(*lo, klo),
                                detail::parse_number_array(*hi, khi)});
    }

    if (auto v = take("grid.resolution")) {
        for (double d : detail::parse_number_array(*v, "grid.resolution"))
            cfg.resolution.push_back(static_cast<int>(d));
    }
    if (auto v = take("truncation.tail_tol"))
        cfg.tail_tol = detail::parse_number(*v, "truncation.tail_tol");
    if (auto v = take("potential.beta")) cfg.beta = detail::parse_number(*v, "potential.beta");
    if (auto v = take("oracle.family")) cfg.oracle_family = *v;
    if (auto v = take("oracle.n")) {
        for (double d : detail::parse_number_array(*v, "oracle.n"))
            cfg.oracle_n.push_back(static_cast<int>(d));
    }
    if (auto v = take("minimize.target_variance"))
        cfg.target_variance = detail::parse_number(*v, "minimize.target_variance");
    if (auto v = take("minimize.algorithm")) cfg.minimize_algorithm = *v;
    if (auto v = take("minimize.step")) cfg.pg_step = detail::parse_number(*v, "minimize.step");
    if (auto v = take("minimize.iters"))
        cfg.pg_iters = static_cast<int>(detail::parse_number(*v, "minimize.iters"));
    if (auto v = take("curve.betas")) cfg.curve_betas = detail::parse_number_array(*v, "curve.betas");
    if (auto v = take("solver.tol")) cfg.solver_tol = detail::parse_number(*v, "solver.tol");
    if (auto v = take("solver.max_iter"))
        cfg.solver_max_iter = static_cast<int>(detail::parse_number(*v, "solver.max_iter"));
    if (auto v = take("functionals.density_csv")) cfg.density_csv = *v;

    for (const auto& [key, val] : kv)
        if (!val.used)
            throw ValidationError("unknown config key: " + key + " (line " +
                                  std::to_string(val.line) + ")");
    return cfg;
}

inline RunConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path.string());
    return parse_config(in, path.string());
}

/// Renders the resolved configuration back in config-file syntax (written
/// next to every run's outputs for provenance).
inline std::string render_config(const RunConfig& c) {
    std::ostringstream os;
    const auto num = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    const auto arr = [](const auto& v) {
        std::ostringstream s;
        s << "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s << ", ";
            s << v[i];
        }
        s << "]";
        return s.str();
    };
    os << "op = " << c.op << "\n";
    os << "out = " << c.out_dir << "\n";
    os << "seed = " << c.seed << "\n";
    os << "dump_fields = " << (c.dump_fields ? "true" : "false") << "\n";
    os << "domain.kind = " << c.domain_kind << "\n";
    os << "domain.dimension = " << c.dimension << "\n";
    if (!c.lower.empty()) os << "domain.lower = " << arr(c.lower) << "\n";
    if (!c.upper.empty()) os << "domain.upper = " << arr(c.upper) << "\n";
    if (c.domain_kind == "halfspace") {
        os << "domain.halfspace.axis = " << c.halfspace_axis << "\n";
        os << "domain.halfspace.sign = " << (c.halfspace_sign > 0 ? "+" : "-") << "\n";
        os << "domain.halfspace.offset = " << c.halfspace_offset << "\n";
    }
    for (std::size_t i = 0; i < c.excluded.size(); ++i) {
        os << "domain.exclude" << (i + 1) << ".lower = " << arr(c.excluded[i].lower) << "\n";
        os << "domain.exclude" << (i + 1) << ".upper = " << arr(c.excluded[i].upper) << "\n";
    }
    if (!c.resolution.empty()) os << "grid.resolution = " << arr(c.resolution) << "\n";
    os << "truncation.tail_tol = " << num(c.tail_tol) << "\n";
    os << "potential.beta = " << num(c.beta) << "\n";
    os << "oracle.family = " << c.oracle_family << "\n";
    if (!c.oracle_n.empty()) os << "oracle.n = " << arr(c.oracle_n) << "\n";
    if (c.target_variance > 0.0)
        os << "minimize.target_variance = " << num(c.target_variance) << "\n";
    os << "minimize.algorithm = " << c.minimize_algorithm << "\n";
    os << "minimize.step = " << num(c.pg_step) << "\n";
    os << "minimize.iters = " << c.pg_iters << "\n";
    if (!c.curve_betas.empty()) os << "curve.betas = " << arr(c.curve_betas) << "\n";
    os << "solver.tol = " << num(c.solver_tol) << "\n";
    os << "solver.max_iter = " << c.solver_max_iter << "\n";
    if (!c.density_csv.empty()) os << "functionals.density_csv = " << c.density_csv << "\n";
    return os.str();
}

} // namespace crlab
