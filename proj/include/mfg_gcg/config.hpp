#pragma once

// Experiment configuration: a flat `key = value` text format.
//
//   # comment
//   preset = example2_1d
//   grid.nx = 200
//   step.rule = golden
//   step.kappa = 1e-15
//
// Keys (defaults in brackets):
//   preset                      example1_2d | example2_1d       [none]
//   grid.dim grid.nx grid.nt    1|2, >= 4, >= 2                 [1, 64, 64]
//   grid.T grid.nu              > 0                             [1, 0.01]
//   coupling.anchor_center      comma list, one per axis        [0.5,...]
//   coupling.anchor_weight      >= 0                            [0]
//   coupling.congestion_weight  >= 0                            [0]
//   coupling.clip_level         > 0                             [5]
//   terminal.kind               zero | cosine                   [zero]
//   terminal.amplitude          g = A sum_a cos(2 pi x_a)       [0]
//   initial.kind                uniform | gaussian              [uniform]
//   initial.center              comma list                      [0.5,...]
//   initial.sigma               > 0                             [0.1]
//   drift.kind                  zero | constant                 [zero]
//   drift.value                 comma list                      [0,...]
//   step.rule                   qag | golden | exploitability | predefined  [qag]
//   step.c step.tau             QAG constants                   [0.25, 0.75]
//   step.kappa                  golden-section tolerance        [1e-5]
//   step.k1 step.k2             predefined delta = k2/(k+k1)    [1, 1]
//   gcg.tol_sigma gcg.max_iters stopping                        [1e-5, 1000]
//   gcg.fp_solver               flux | cole_hopf                [flux]
//   reference.path              reference bundle directory      [none]
//   output.dir                  output directory                [out]
//   output.snapshot_every       field snapshot period, 0 = off  [0]
//   output.wall_clock           record wall_ms in metrics       [true]
//
// A preset fixes grid.dim, grid.T, grid.nu and every coupling/terminal/
// initial/drift key; setting one of those alongside a preset is an error.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "field_io.hpp"
#include "gcg.hpp"
#include "grid.hpp"
#include "stepsize.hpp"

namespace mfg {

struct TerminalPreset {
    std::string kind = "zero";  // zero | cosine
    double amplitude = 0.0;
    bool operator==(const TerminalPreset&) const = default;
};

struct InitialPreset {
    std::string kind = "uniform";  // uniform | gaussian
    std::vector<double> center{0.5};
    double sigma = 0.1;
    bool operator==(const InitialPreset&) const = default;
};

struct DriftPreset {
    std::string kind = "zero";  // zero | constant
    std::vector<double> value{0.0};
    bool operator==(const DriftPreset&) const = default;
};

struct StepParams {
    std::string rule = "qag";
    double c = 0.25;
    double tau = 0.75;
    double kappa = 1e-5;
    double k1 = 1.0;
    double k2 = 1.0;
    bool operator==(const StepParams&) const = default;
};

struct ExperimentConfig {
    std::optional<std::string> preset;
    Grid grid;
    CouplingSpec coupling;
    TerminalPreset terminal;
    InitialPreset initial;
    DriftPreset drift;
    StepParams step;
    double tol_sigma = 1e-5;
    int max_iters = 1000;
    std::string fp_solver = "flux";
    std::optional<std::string> reference_path;
    std::optional<std::string> output_dir;  // unset -> "out" (sweeps pick per-run dirs)
    int snapshot_every = 0;
    bool wall_clock = true;

    std::string output_dir_or_default() const { return output_dir.value_or("out"); }
    bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline double to_number(const std::string& key, const std::string& v) {
    try {
        return parse_double(v);
    } catch (const ParseError&) {
        throw ParseError(key + ": expected a number, got '" + v + "'");
    }
}

inline int to_int(const std::string& key, const std::string& v) {
    const double d = to_number(key, v);
    if (d != std::floor(d) || std::abs(d) > 1e9) throw ParseError(key + ": expected an integer, got '" + v + "'");
    return static_cast<int>(d);
}

inline std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::string_view rest(v);
    while (true) {
        const auto comma = rest.find(',');
        out.push_back(to_number(key, trim(rest.substr(0, comma))));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ParseError(key + ": expected true/false, got '" + v + "'");
}

inline std::string list_text(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
}

inline bool is_physical_key(const std::string& key) {
    static const std::array<std::string_view, 4> prefixes{"coupling.", "terminal.", "initial.", "drift."};
    if (key == "grid.dim" || key == "grid.T" || key == "grid.nu") return true;
    return std::any_of(prefixes.begin(), prefixes.end(), [&](std::string_view p) { return key.rfind(p, 0) == 0; });
}

} // namespace detail

// Physical parameters of the two reference experiments. Grid sizes and the
// step rule stay at their defaults until overridden.
inline ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig cfg;
    cfg.preset = name;
    if (name == "example2_1d") {
        cfg.grid = Grid{1, 200, 500, 0.1, 0.01};
        cfg.coupling = CouplingSpec{{0.5}, 1.0, 4.0, 5.0};
        cfg.terminal = TerminalPreset{"cosine", -1.0 / (2.0 * std::numbers::pi)};
        cfg.initial = InitialPreset{"gaussian", {0.5}, 0.1};
        cfg.drift = DriftPreset{"zero", {0.0}};
    } else if (name == "example1_2d") {
        cfg.grid = Grid{2, 40, 40, 0.25, 0.01};
        cfg.coupling = CouplingSpec{{0.5, 0.5}, 1.0, 2.0, 5.0};
        cfg.terminal = TerminalPreset{"cosine", -1.0 / (4.0 * std::numbers::pi)};
        cfg.initial = InitialPreset{"gaussian", {0.5, 0.5}, 0.2};
        cfg.drift = DriftPreset{"zero", {0.0, 0.0}};
    } else {
        throw ValidationError("preset", "unknown preset '" + name + "'");
    }
    return cfg;
}

inline StepRule make_step_rule(const ExperimentConfig& cfg) {
    const auto& s = cfg.step;
    if (s.rule == "qag") return QagRule{s.c, s.tau};
    if (s.rule == "golden") return GoldenSectionRule{s.kappa};
    if (s.rule == "exploitability") return ExploitabilityRule{lipschitz_constant(cfg.coupling)};
    if (s.rule == "predefined") return PredefinedRule{s.k1, s.k2};
    throw ValidationError("step.rule", "unknown rule '" + s.rule + "'");
}

inline std::string step_params_text(const ExperimentConfig& cfg) {
    const auto& s = cfg.step;
    if (s.rule == "qag") return "c=" + format_double(s.c) + ";tau=" + format_double(s.tau);
    if (s.rule == "golden") return "kappa=" + format_double(s.kappa);
    if (s.rule == "exploitability") return "L_f=" + format_double(lipschitz_constant(cfg.coupling));
    return "k1=" + format_double(s.k1) + ";k2=" + format_double(s.k2);
}

inline void validate(const ExperimentConfig& cfg) {
    cfg.grid.validate();
    cfg.coupling.validate(cfg.grid.dim);
    const auto dim = static_cast<std::size_t>(cfg.grid.dim);
    if (cfg.terminal.kind != "zero" && cfg.terminal.kind != "cosine")
        throw ValidationError("terminal.kind", "must be zero or cosine");
    if (!std::isfinite(cfg.terminal.amplitude)) throw ValidationError("terminal.amplitude", "must be finite");
    if (cfg.initial.kind != "uniform" && cfg.initial.kind != "gaussian")
        throw ValidationError("initial.kind", "must be uniform or gaussian");
    if (cfg.initial.center.size() != dim) throw ValidationError("initial.center", "needs one coordinate per axis");
    if (!(cfg.initial.sigma > 0.0)) throw ValidationError("initial.sigma", "must be > 0");
    if (cfg.drift.kind != "zero" && cfg.drift.kind != "constant")
        throw ValidationError("drift.kind", "must be zero or constant");
    if (cfg.drift.value.size() != dim) throw ValidationError("drift.value", "needs one component per axis");
    validate(make_step_rule(cfg), cfg.grid.dim);
    if (!(cfg.tol_sigma > 0.0)) throw ValidationError("gcg.tol_sigma", "must be > 0");
    if (cfg.max_iters < 1) throw ValidationError("gcg.max_iters", "must be >= 1");
    if (cfg.fp_solver != "flux" && cfg.fp_solver != "cole_hopf")
        throw ValidationError("gcg.fp_solver", "must be flux or cole_hopf");
    if (cfg.snapshot_every < 0) throw ValidationError("output.snapshot_every", "must be >= 0");
}

inline ExperimentConfig parse_config(std::string_view text) {
    std::map<std::string, std::string> kv;
    std::vector<std::string> order;
    std::istringstream is{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ParseError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = detail::trim(std::string_view(t).substr(0, eq));
        std::string val = detail::trim(std::string_view(t).substr(eq + 1));
        if (key.empty()) throw ParseError("line " + std::to_string(lineno) + ": empty key");
        if (kv.count(key)) throw ParseError("line " + std::to_string(lineno) + ": duplicate key " + key);
        kv.emplace(key, val);
        order.push_back(key);
    }

    ExperimentConfig cfg;
    if (const auto it = kv.find("preset"); it != kv.end()) {
        cfg = preset_config(it->second);
        for (const auto& key : order)
            if (detail::is_physical_key(key)) throw ValidationError(key, "fixed by preset " + it->second);
    } else {
        // Default anchor/initial/drift vectors follow grid.dim when it is given.
        if (const auto d = kv.find("grid.dim"); d != kv.end()) {
            cfg.grid.dim = detail::to_int("grid.dim", d->second);
            const auto dim = static_cast<std::size_t>(std::clamp(cfg.grid.dim, 1, 2));
            cfg.coupling.anchor_center.assign(dim, 0.5);
            cfg.initial.center.assign(dim, 0.5);
            cfg.drift.value.assign(dim, 0.0);
        }
    }

    for (const auto& key : order) {
        const std::string& v = kv.at(key);
        if (key == "preset" || key == "grid.dim") continue;
        else if (key == "grid.nx") cfg.grid.nx = detail::to_int(key, v);
        else if (key == "grid.nt") cfg.grid.nt = detail::to_int(key, v);
        else if (key == "grid.T") cfg.grid.T = detail::to_number(key, v);
        else if (key == "grid.nu") cfg.grid.nu = detail::to_number(key, v);
        else if (key == "coupling.anchor_center") cfg.coupling.anchor_center = detail::to_list(key, v);
        else if (key == "coupling.anchor_weight") cfg.coupling.anchor_weight = detail::to_number(key, v);
        else if (key == "coupling.congestion_weight") cfg.coupling.congestion_weight = detail::to_number(key, v);
        else if (key == "coupling.clip_level") cfg.coupling.clip_level = detail::to_number(key, v);
        else if (key == "terminal.kind") cfg.terminal.kind = v;
        else if (key == "terminal.amplitude") cfg.terminal.amplitude = detail::to_number(key, v);
        else if (key == "initial.kind") cfg.initial.kind = v;
        else if (key == "initial.center") cfg.initial.center = detail::to_list(key, v);
        else if (key == "initial.sigma") cfg.initial.sigma = detail::to_number(key, v);
        else if (key == "drift.kind") cfg.drift.kind = v;
        else if (key == "drift.value") cfg.drift.value = detail::to_list(key, v);
        else if (key == "step.rule") cfg.step.rule = v;
        else if (key == "step.c") cfg.step.c = detail::to_number(key, v);
        else if (key == "step.tau") cfg.step.tau = detail::to_number(key, v);
        else if (key == "step.kappa") cfg.step.kappa = detail::to_number(key, v);
        else if (key == "step.k1") cfg.step.k1 = detail::to_number(key, v);
        else if (key == "step.k2") cfg.step.k2 = detail::to_number(key, v);
        else if (key == "gcg.tol_sigma") cfg.tol_sigma = detail::to_number(key, v);
        else if (key == "gcg.max_iters") cfg.max_iters = detail::to_int(key, v);
        else if (key == "gcg.fp_solver") cfg.fp_solver = v;
        else if (key == "reference.path") cfg.reference_path = v;
        else if (key == "output.dir") cfg.output_dir = v;
        else if (key == "output.snapshot_every") cfg.snapshot_every = detail::to_int(key, v);
        else if (key == "output.wall_clock") cfg.wall_clock = detail::to_bool(key, v);
        else throw ValidationError(key, "unknown key");
    }
    validate(cfg);
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

// Physical part of the configuration (everything that defines the game).
inline std::string problem_text(const ExperimentConfig& cfg) {
    std::ostringstream os;
    const auto& g = cfg.grid;
    os << "grid.dim = " << g.dim << "\ngrid.nx = " << g.nx << "\ngrid.nt = " << g.nt
       << "\ngrid.T = " << format_double(g.T) << "\ngrid.nu = " << format_double(g.nu) << '\n';
    os << "coupling.anchor_center = " << detail::list_text(cfg.coupling.anchor_center) << '\n'
       << "coupling.anchor_weight = " << format_double(cfg.coupling.anchor_weight) << '\n'
       << "coupling.congestion_weight = " << format_double(cfg.coupling.congestion_weight) << '\n'
       << "coupling.clip_level = " << format_double(cfg.coupling.clip_level) << '\n'
       << "terminal.kind = " << cfg.terminal.kind << '\n'
       << "terminal.amplitude = " << format_double(cfg.terminal.amplitude) << '\n'
       << "initial.kind = " << cfg.initial.kind << '\n'
       << "initial.center = " << detail::list_text(cfg.initial.center) << '\n'
       << "initial.sigma = " << format_double(cfg.initial.sigma) << '\n'
       << "drift.kind = " << cfg.drift.kind << '\n'
       << "drift.value = " << detail::list_text(cfg.drift.value) << '\n'
       << "gcg.fp_solver = " << cfg.fp_solver << '\n';
    return os.str();
}

// Canonical text: fixed key order, every value written out.
inline std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    if (cfg.preset) {
        os << "preset = " << *cfg.preset << '\n'
           << "grid.nx = " << cfg.grid.nx << '\n'
           << "grid.nt = " << cfg.grid.nt << '\n'
           << "gcg.fp_solver = " << cfg.fp_solver << '\n';
    } else {
        os << problem_text(cfg);
    }
    const auto& s = cfg.step;
    os << "step.rule = " << s.rule << '\n'
       << "step.c = " << format_double(s.c) << '\n'
       << "step.tau = " << format_double(s.tau) << '\n'
       << "step.kappa = " << format_double(s.kappa) << '\n'
       << "step.k1 = " << format_double(s.k1) << '\n'
       << "step.k2 = " << format_double(s.k2) << '\n'
       << "gcg.tol_sigma = " << format_double(cfg.tol_sigma) << '\n'
       << "gcg.max_iters = " << cfg.max_iters << '\n';
    if (cfg.reference_path) os << "reference.path = " << *cfg.reference_path << '\n';
    if (cfg.output_dir) os << "output.dir = " << *cfg.output_dir << '\n';
    os << "output.snapshot_every = " << cfg.snapshot_every << '\n'
       << "output.wall_clock = " << (cfg.wall_clock ? "true" : "false") << '\n';
    return os.str();
}

// FNV-1a over the problem text, as 16 hex digits.
inline std::string problem_digest(const ExperimentConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : problem_text(cfg)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Density sampled at the grid points from the three nearest periodic images
// per axis, then rescaled to unit discrete mass.
inline SpatialField periodic_gaussian(const Grid& grid, const std::vector<double>& center, double sigma) {
    SpatialField m(grid.points(), 0.0);
    const double norm = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.5 * grid.dim);
    for (std::size_t p = 0; p < m.size(); ++p) {
        double axis_sum[2] = {0.0, 0.0};
        for (int a = 0; a < grid.dim; ++a) {
            for (int img = -1; img <= 1; ++img) {
                const double d = grid.coord(p, a) + img - center[static_cast<std::size_t>(a)];
                axis_sum[a] += std::exp(-d * d / (2.0 * sigma * sigma));
            }
        }
        m[p] = norm * axis_sum[0] * (grid.dim == 2 ? axis_sum[1] : 1.0);
    }
    const double mass = integrate_space(m, grid);
    for (double& v : m) v /= mass;
    return m;
}

inline Problem build_problem(const ExperimentConfig& cfg) {
    validate(cfg);
    const Grid& grid = cfg.grid;
    Problem pb{grid, cfg.coupling, SpatialField(grid.points(), 0.0), SpatialField(grid.points(), 1.0),
               VectorField(grid)};
    if (cfg.terminal.kind == "cosine") {
        for (std::size_t p = 0; p < pb.g.size(); ++p) {
            double s = 0.0;
            for (int a = 0; a < grid.dim; ++a) s += std::cos(2.0 * std::numbers::pi * grid.coord(p, a));
            pb.g[p] = cfg.terminal.amplitude * s;
        }
    }
    if (cfg.initial.kind == "gaussian") pb.m0 = periodic_gaussian(grid, cfg.initial.center, cfg.initial.sigma);
    if (cfg.drift.kind == "constant") {
        for (int a = 0; a < grid.dim; ++a) {
            auto& comp = pb.h[a].values();
            std::fill(comp.begin(), comp.end(), cfg.drift.value[static_cast<std::size_t>(a)]);
        }
    }
    return pb;
}

inline GcgConfig make_gcg_config(const ExperimentConfig& cfg) {
    GcgConfig gc;
    gc.problem = build_problem(cfg);
    gc.step = make_step_rule(cfg);
    gc.tol_sigma = cfg.tol_sigma;
    gc.max_iters = cfg.max_iters;
    gc.record_wall_time = cfg.wall_clock;
    gc.fp_solver = cfg.fp_solver == "cole_hopf" ? FpSolver::ColeHopf : FpSolver::Flux;
    return gc;
}

} // namespace mfg
