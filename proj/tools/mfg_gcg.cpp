// mfg-gcg: run, reference, compare and sweep GCG experiments.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mfg_gcg/mfg_gcg.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Generalized conditional gradient solver for mean field games on the torus"};
    app.require_subcommand(1);

    std::string config_path, reference_path, sweep_dir, bundle_dir;
    int iters = 0;

    auto* run = app.add_subcommand("run", "single run, writes metrics.csv and summary.txt");
    run->add_option("config", config_path, "configuration file")->required();

    auto* reference = app.add_subcommand("reference", "produce a reference bundle (delta_k = 10/(k+10))");
    reference->add_option("config", config_path, "configuration file")->required();
    reference->add_option("--iters", iters, "number of iterations")->required();
    reference->add_option("--out", bundle_dir, "bundle directory (default <output.dir>/reference)");

    auto* compare = app.add_subcommand("compare", "run and report eps, star error against a reference");
    compare->add_option("config", config_path, "configuration file")->required();
    compare->add_option("--reference", reference_path, "reference bundle directory")->required();

    auto* sweep = app.add_subcommand("sweep", "run every *.cfg of a directory, write sweep.csv");
    sweep->add_option("config-dir", sweep_dir, "directory of configuration files")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return mfg::cmd_run(mfg::load_config(config_path), std::cout);
        if (*reference) {
            const auto cfg = mfg::load_config(config_path);
            if (bundle_dir.empty()) bundle_dir = cfg.output_dir_or_default() + "/reference";
            return mfg::cmd_reference(cfg, iters, bundle_dir, std::cout);
        }
        if (*compare) return mfg::cmd_compare(mfg::load_config(config_path), reference_path, std::cout);
        if (*sweep) return mfg::cmd_sweep(sweep_dir, std::cout);
    } catch (const mfg::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return mfg::kExitConfig;
    } catch (const mfg::ReferenceError& e) {
        std::cerr << "reference error: " << e.what() << '\n';
        return mfg::kExitConfig;
    } catch (const mfg::SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return mfg::kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
