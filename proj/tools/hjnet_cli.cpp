#include <CLI11.hpp>

#include "hjnet/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Hamilton-Jacobi solver on embedded networks"};

    std::string scenario_path;
    std::string out_dir = "out";
    double ds = 0, dt = 0, kappa = 0;
    int levels = 0;
    unsigned seed = 0;
    bool quiet = false;

    app.add_option("--scenario", scenario_path, "scenario JSON file (or a manifest from a previous run)")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--ds", ds, "override the target spatial step");
    app.add_option("--dt", dt, "override the time step");
    app.add_option("--kappa", kappa, "override the speed cap");
    app.add_option("--levels", levels, "override the number of refinement levels");
    app.add_option("--seed", seed, "seed for sampled checks");
    app.add_flag("--quiet", quiet, "suppress progress output");

    CLI11_PARSE(app, argc, argv);

    hjnet::RunOverrides ov;
    if (ds > 0) ov.ds = ds;
    if (dt > 0) ov.dt = dt;
    if (kappa > 0) ov.kappa = kappa;
    if (levels > 0) ov.levels = levels;
    if (seed > 0) ov.seed = seed;
    ov.quiet = quiet;

    return hjnet::run_scenario(scenario_path, out_dir, ov);
}
