#pragma once

// Persistence: metrics CSV and reference bundles.
//
// A reference bundle is a directory holding
//   reference.txt   grid descriptor, J value, problem digest (key = value)
//   m.csv           averaged density mbar
//   w0.csv [w1.csv] averaged momentum components
// with fields in the snapshot CSV format, so values reload bit-exactly.

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "error.hpp"
#include "field_io.hpp"
#include "gcg.hpp"

namespace mfg {

inline void write_metrics_csv(std::ostream& os, const std::vector<IterationMetrics>& rows, bool with_star = false) {
    os << "k,delta,sigma,J,eps,D,mass_err,wall_ms";
    if (with_star) os << ",star_error,ratio";
    os << '\n';
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (const auto& r : rows) {
        os << r.k << ',' << opt(r.delta) << ',' << format_double(r.sigma) << ',' << format_double(r.j_value) << ','
           << opt(r.eps) << ',' << format_double(r.d_k) << ',' << format_double(r.mass_err) << ','
           << format_double(r.wall_ms);
        if (with_star) {
            std::optional<double> ratio;
            if (r.star_error && r.eps && *r.eps > 0.0) ratio = *r.star_error / std::sqrt(*r.eps);
            os << ',' << opt(r.star_error) << ',' << opt(ratio);
        }
        os << '\n';
    }
}

struct ReferenceBundle {
    Grid grid;
    FlowPair pair;
    double j_value = 0.0;
    std::string digest;
    int iterations = 0;

    Reference reference() const { return Reference{pair, j_value}; }
};

namespace detail {

inline void write_file_field(const std::filesystem::path& path, const SpaceTimeField& f, const Grid& grid) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    write_field_csv(out, f, grid);
}

inline SpaceTimeField read_file_field(const std::filesystem::path& path, const Grid& grid) {
    std::ifstream in(path);
    if (!in) throw MissingReference("missing reference field " + path.string());
    return read_field_csv(in, grid);
}

} // namespace detail

inline void save_reference(const std::filesystem::path& dir, const ReferenceBundle& b) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "reference.txt");
        if (!out) throw Error("cannot write reference header in " + dir.string());
        out << "dim = " << b.grid.dim << "\nnx = " << b.grid.nx << "\nnt = " << b.grid.nt
            << "\nT = " << format_double(b.grid.T) << "\nnu = " << format_double(b.grid.nu)
            << "\nJ = " << format_double(b.j_value) << "\ndigest = " << b.digest
            << "\niterations = " << b.iterations << '\n';
    }
    detail::write_file_field(dir / "m.csv", b.pair.m, b.grid);
    for (int a = 0; a < b.grid.dim; ++a)
        detail::write_file_field(dir / ("w" + std::to_string(a) + ".csv"), b.pair.w[a], b.grid);
}

inline ReferenceBundle load_reference(const std::filesystem::path& dir) {
    std::ifstream in(dir / "reference.txt");
    if (!in) throw MissingReference("no reference bundle at " + dir.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv[detail::trim(std::string_view(line).substr(0, eq))] = detail::trim(std::string_view(line).substr(eq + 1));
    }
    auto get = [&](const std::string& k) {
        const auto it = kv.find(k);
        if (it == kv.end()) throw ParseError("reference header lacks '" + k + "'");
        return it->second;
    };
    ReferenceBundle b;
    b.grid = Grid{detail::to_int("dim", get("dim")), detail::to_int("nx", get("nx")), detail::to_int("nt", get("nt")),
                  detail::to_number("T", get("T")), detail::to_number("nu", get("nu"))};
    b.grid.validate();
    b.j_value = detail::to_number("J", get("J"));
    b.digest = get("digest");
    b.iterations = detail::to_int("iterations", get("iterations"));
    b.pair.m = detail::read_file_field(dir / "m.csv", b.grid);
    b.pair.w = VectorField(b.grid);
    for (int a = 0; a < b.grid.dim; ++a)
        b.pair.w[a] = detail::read_file_field(dir / ("w" + std::to_string(a) + ".csv"), b.grid);
    return b;
}

// Loads a bundle and checks it was produced for the same game and grid.
inline ReferenceBundle load_matching_reference(const std::filesystem::path& dir, const ExperimentConfig& cfg) {
    ReferenceBundle b = load_reference(dir);
    if (!(b.grid == cfg.grid))
        throw DigestMismatch("reference grid differs from the run grid (" + dir.string() + ")");
    if (b.digest != problem_digest(cfg))
        throw DigestMismatch("reference digest " + b.digest + " != run digest " + problem_digest(cfg));
    return b;
}

} // namespace mfg
