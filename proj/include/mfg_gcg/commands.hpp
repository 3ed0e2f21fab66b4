#pragma once

// Run orchestration behind the mfg-gcg command line.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "config.hpp"
#include "error.hpp"
#include "gcg.hpp"
#include "reference.hpp"

namespace mfg {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitSolver = 3 };

inline std::string summary_line(const GcgResult& r) {
    double wall = 0.0;
    for (const auto& row : r.state.history) wall += row.wall_ms;
    std::string s = "stop=" + to_string(r.stop) + " iterations=" + std::to_string(r.iterations());
    if (!r.state.history.empty()) {
        const auto& last = r.state.history.back();
        s += " sigma=" + format_double(last.sigma) + " J=" + format_double(last.j_value);
    }
    s += " wall_ms=" + format_double(wall);
    if (!r.detail.empty()) s += " detail=\"" + r.detail + "\"";
    return s;
}

namespace detail {

inline GcgResult execute(const ExperimentConfig& cfg, const GcgConfig& gc, const Reference* ref,
                         const std::filesystem::path& out_dir) {
    IterationObserver observer;
    if (cfg.snapshot_every > 0) {
        const auto snap_dir = out_dir / "snapshots";
        std::filesystem::create_directories(snap_dir);
        observer = [&, snap_dir](const IterationView& it) {
            if (it.k % cfg.snapshot_every != 0) return;
            const auto tag = std::to_string(it.k);
            write_file_field(snap_dir / ("mbar_" + tag + ".csv"), it.bar.m, gc.problem.grid);
            write_file_field(snap_dir / ("u_" + tag + ".csv"), it.hjb.u, gc.problem.grid);
        };
    }
    return run(gc, ref, observer);
}

inline void write_outputs(const std::filesystem::path& out_dir, const GcgResult& r, bool with_star) {
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream out(out_dir / "metrics.csv");
        if (!out) throw Error("cannot write " + (out_dir / "metrics.csv").string());
        write_metrics_csv(out, r.state.history, with_star);
    }
    std::ofstream(out_dir / "summary.txt") << summary_line(r) << '\n';
}

} // namespace detail

// Single run; picks up reference.path from the config when present.
inline int cmd_run(const ExperimentConfig& cfg, std::ostream& log) {
    const GcgConfig gc = make_gcg_config(cfg);
    std::optional<Reference> ref;
    if (cfg.reference_path) ref = load_matching_reference(*cfg.reference_path, cfg).reference();
    const std::filesystem::path out_dir = cfg.output_dir_or_default();
    std::filesystem::create_directories(out_dir);
    const GcgResult r = detail::execute(cfg, gc, ref ? &*ref : nullptr, out_dir);
    detail::write_outputs(out_dir, r, ref.has_value());
    log << summary_line(r) << '\n';
    return r.stop == StopReason::SolverError ? kExitSolver : kExitOk;
}

// Runs `iters` updates of the predefined rule k1 = k2 = 10 regardless of
// sigma and stores the averaged iterate as a reference bundle.
inline int cmd_reference(ExperimentConfig cfg, int iters, const std::filesystem::path& bundle_dir, std::ostream& log) {
    if (iters < 1) throw ValidationError("--iters", "must be >= 1");
    cfg.step.rule = "predefined";
    cfg.step.k1 = 10.0;
    cfg.step.k2 = 10.0;
    cfg.max_iters = iters + 1;
    cfg.reference_path.reset();
    GcgConfig gc = make_gcg_config(cfg);
    gc.stop_on_sigma = false;
    const GcgResult r = run(gc);
    log << summary_line(r) << '\n';
    if (r.stop == StopReason::SolverError) return kExitSolver;

    ReferenceBundle b;
    b.grid = cfg.grid;
    b.pair = r.state.bar;
    b.j_value = r.state.history.back().j_value;
    b.digest = problem_digest(cfg);
    b.iterations = iters;
    save_reference(bundle_dir, b);
    return kExitOk;
}

// Run against a stored reference: metrics gain eps, star_error and
// star_error / sqrt(eps).
inline int cmd_compare(ExperimentConfig cfg, const std::filesystem::path& reference_dir, std::ostream& log) {
    const Reference ref = load_matching_reference(reference_dir, cfg).reference();
    cfg.reference_path = reference_dir.string();
    const GcgConfig gc = make_gcg_config(cfg);
    const std::filesystem::path out_dir = cfg.output_dir_or_default();
    const GcgResult r = detail::execute(cfg, gc, &ref, out_dir);
    detail::write_outputs(out_dir, r, true);
    log << summary_line(r) << '\n';
    return r.stop == StopReason::SolverError ? kExitSolver : kExitOk;
}

struct SweepEntry {
    std::string name;
    std::string rule;
    std::string params;
    int iterations = 0;
    std::string stop;
    double wall_ms = 0.0;
};

inline int sweep_threads() {
    int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("MFG_GCG_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) n = std::min(n, cap);
    }
    return n;
}

inline std::vector<std::filesystem::path> sweep_config_files(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_directory(dir))
        for (const auto& e : std::filesystem::directory_iterator(dir))
            if (e.is_regular_file() && e.path().extension() == ".cfg") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    return files;
}

// Runs every *.cfg in `dir` (possibly concurrently) and writes sweep.csv
// there. Runs without output.dir write to <dir>/results/<stem>.
inline std::vector<SweepEntry> run_sweep(const std::vector<std::pair<std::string, ExperimentConfig>>& configs,
                                         int threads) {
    if (configs.empty()) throw ValidationError("sweep", "no configurations given");
    for (const auto& [name, cfg] : configs)
        if (cfg.preset != configs.front().second.preset)
            throw ValidationError("preset", "sweep configurations must share a preset (" + name + ")");

    std::vector<SweepEntry> entries(configs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            const auto& [name, cfg] = configs[i];
            SweepEntry& e = entries[i];
            e.name = name;
            e.rule = cfg.step.rule;
            e.params = step_params_text(cfg);
            const auto t0 = std::chrono::steady_clock::now();
            try {
                std::optional<Reference> ref;
                if (cfg.reference_path) ref = load_matching_reference(*cfg.reference_path, cfg).reference();
                const GcgConfig gc = make_gcg_config(cfg);
                const std::filesystem::path out_dir = cfg.output_dir_or_default();
                const GcgResult r = detail::execute(cfg, gc, ref ? &*ref : nullptr, out_dir);
                detail::write_outputs(out_dir, r, ref.has_value());
                e.iterations = r.iterations();
                e.stop = to_string(r.stop);
            } catch (const std::exception& ex) {
                e.stop = std::string("SolverError: ") + ex.what();
            }
            e.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        }
    };
    const int n = std::max(1, std::min<int>(threads, static_cast<int>(configs.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return entries;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepEntry>& entries) {
    os << "config,rule,params,iterations,stop_reason,wall_ms\n";
    for (const auto& e : entries) {
        std::string stop = e.stop;
        std::replace(stop.begin(), stop.end(), ',', ';');
        os << e.name << ',' << e.rule << ',' << e.params << ',' << e.iterations << ',' << stop << ','
           << format_double(e.wall_ms) << '\n';
    }
}

inline int cmd_sweep(const std::filesystem::path& dir, std::ostream& log) {
    std::vector<std::pair<std::string, ExperimentConfig>> configs;
    for (const auto& file : sweep_config_files(dir)) {
        ExperimentConfig cfg = load_config(file.string());
        if (!cfg.output_dir) cfg.output_dir = (dir / "results" / file.stem()).string();
        configs.emplace_back(file.stem().string(), std::move(cfg));
    }
    const auto entries = run_sweep(configs, sweep_threads());
    std::ofstream out(dir / "sweep.csv");
    write_sweep_csv(out, entries);
    write_sweep_csv(log, entries);
    return kExitOk;
}

} // namespace mfg
