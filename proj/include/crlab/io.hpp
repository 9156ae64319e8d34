#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "crlab/field.hpp"
#include "crlab/functionals.hpp"
#include "crlab/grid.hpp"
#include "crlab/numerics.hpp"

namespace crlab {

/// 17 significant digits: enough to round-trip any double bit-exactly.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Writes via a temporary file and rename, so readers never observe a
/// half-written artifact.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw NumericError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

/// Ordered flat key -> number map rendered as a JSON object.
class FlatReport {
public:
    void add(const std::string& key, double value) { entries_.emplace_back(key, value); }

    std::string to_json() const {
        std::ostringstream os;
        os << "{\n";
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            os << "  \"" << entries_[i].first << "\": " << format_double(entries_[i].second);
            if (i + 1 < entries_.size()) os << ",";
            os << "\n";
        }
        os << "}\n";
        return os.str();
    }

    const std::vector<std::pair<std::string, double>>& entries() const { return entries_; }

private:
    std::vector<std::pair<std::string, double>> entries_;
};

inline void add_report(FlatReport& out, const std::string& prefix, const FunctionalReport& r) {
    out.add(prefix + "normalization", r.normalization);
    out.add(prefix + "variance", r.variance);
    out.add(prefix + "fisher", r.fisher);
    out.add(prefix + "cr_product", r.cr_product);
    for (std::size_t a = 0; a < r.spacing.size(); ++a)
        out.add(prefix + "h." + std::to_string(a), r.spacing[a]);
}

/// CSV dump of a field: header "x1,...,xD,u", one row per node in
/// row-major order, every number with 17 significant digits.
inline std::string dump_field_csv(const GridField& field) {
    const Grid& G = *field.grid;
    std::ostringstream os;
    for (int a = 0; a < G.dim(); ++a) os << "x" << (a + 1) << ",";
    os << "u\n";
    std::vector<double> x;
    for (std::size_t p = 0; p < G.size(); ++p) {
        G.node_position(p, x);
        for (int a = 0; a < G.dim(); ++a) os << format_double(x[static_cast<std::size_t>(a)]) << ",";
        os << format_double(field.u[p]) << "\n";
    }
    return os.str();
}

/// Rebuilds a field from a CSV dump. The rows must form a complete uniform
/// tensor grid (spacing deviations beyond 1e-9 of the axis span are
/// rejected). The reconstructed field is normalized; a field that already
/// integrates to 1 within 1e-10 is left untouched so that
/// dump -> ingest -> dump round-trips byte-identically.
inline GridField ingest_density(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw ValidationError("density file is empty");
    if (!header.empty() && header.back() == '\r') header.pop_back();
    std::vector<std::string> cols;
    {
        std::stringstream hs(header);
        std::string tok;
        while (std::getline(hs, tok, ',')) cols.push_back(tok);
    }
    if (cols.size() < 2 || cols.back() != "u")
        throw ValidationError("density file header must be x1,...,xD,u");
    const int D = static_cast<int>(cols.size()) - 1;
    for (int a = 0; a < D; ++a)
        if (cols[static_cast<std::size_t>(a)] != "x" + std::to_string(a + 1))
            throw ValidationError("density file header must be x1,...,xD,u");

    std::vector<std::vector<double>> coords(static_cast<std::size_t>(D));
    std::vector<double> values;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        row.reserve(static_cast<std::size_t>(D) + 1);
        std::stringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ',')) {
            char* end = nullptr;
            const double v = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str()) throw ValidationError("bad number at line " +
                                                          std::to_string(line_no));
            row.push_back(v);
        }
        if (row.size() != static_cast<std::size_t>(D) + 1)
            throw ValidationError("wrong column count at line " + std::to_string(line_no));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ValidationError("density file has no data rows");

    // unique sorted coordinates per axis
    for (int a = 0; a < D; ++a) {
        std::vector<double> vals;
        vals.reserve(rows.size());
        for (const auto& r : rows) vals.push_back(r[static_cast<std::size_t>(a)]);
        std::sort(vals.begin(), vals.end());
        const double span = std::max(1.0, vals.back() - vals.front());
        const double merge_tol = 1e-9 * span;
        auto& uniq = coords[static_cast<std::size_t>(a)];
        for (double v : vals)
            if (uniq.empty() || v - uniq.back() > merge_tol) uniq.push_back(v);
        if (uniq.size() < 2)
            throw ValidationError("axis " + std::to_string(a + 1) + " is degenerate");
        const double h = (uniq.back() - uniq.front()) / static_cast<double>(uniq.size() - 1);
        for (std::size_t k = 0; k < uniq.size(); ++k)
            if (std::abs(uniq[k] - (uniq.front() + h * static_cast<double>(k))) > merge_tol)
                throw ValidationError("non-uniform spacing on axis " + std::to_string(a + 1));
    }

    std::vector<int> npts;
    std::vector<std::pair<double, double>> box;
    std::size_t expected = 1;
    for (int a = 0; a < D; ++a) {
        const auto& c = coords[static_cast<std::size_t>(a)];
        npts.push_back(static_cast<int>(c.size()));
        box.emplace_back(c.front(), c.back());
        expected *= c.size();
    }
    if (rows.size() != expected)
        throw ValidationError("incomplete tensor grid: expected " + std::to_string(expected) +
                              " nodes, file has " + std::to_string(rows.size()) + " (" +
                              std::to_string(expected > rows.size() ? expected - rows.size()
                                                                    : rows.size() - expected) +
                              (expected > rows.size() ? " missing)" : " extra)"));

    auto grid_mut = std::make_shared<Grid>(DomainSpec::box(box), npts);
    grid_mut->override_coords(coords);
    GridPtr grid = grid_mut;

    GridField field(grid);
    std::vector<std::uint8_t> seen(grid->size(), 0);
    std::vector<int> multi(static_cast<std::size_t>(D));
    for (const auto& r : rows) {
        for (int a = 0; a < D; ++a) {
            const auto& c = coords[static_cast<std::size_t>(a)];
            const double h =
                (c.back() - c.front()) / static_cast<double>(c.size() - 1);
            int k = static_cast<int>(std::lround((r[static_cast<std::size_t>(a)] - c.front()) / h));
            k = std::clamp(k, 0, static_cast<int>(c.size()) - 1);
            multi[static_cast<std::size_t>(a)] = k;
        }
        const std::size_t flat = grid->index(multi);
        if (seen[flat]) throw ValidationError("duplicate node in density file");
        seen[flat] = 1;
        field.u[flat] = r.back();
    }

    field.apply_mask();
    std::vector<double> integrand(grid->size());
    for (std::size_t p = 0; p < grid->size(); ++p)
        integrand[p] = grid->weight(p) * field.u[p] * field.u[p];
    const double s = pairwise_sum(integrand);
    if (std::abs(s - 1.0) <= 1e-10) {
        field.normalized = true;
        return field;
    }
    return normalize(std::move(field));
}

inline GridField ingest_density(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open density file: " + path.string());
    return ingest_density(in);
}

} // namespace crlab
