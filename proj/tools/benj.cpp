// benj: spectral solver front end.
//
//   benj solve      --config run.cfg [--override key=value ...] [--quiet]
//   benj converge   --config run.cfg [...]
//   benj soliton    --config run.cfg [...]
//   benj invariants --config run.cfg snapshot.txt ...
//
// Exit codes: 0 success, 2 invalid input, 3 divergence, 1 anything else.

#include <benj/cli/commands.hpp>

#include "CLI11.hpp"

#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    using namespace benj::cli;

    CLI::App app{"Fourier-Galerkin solver for periodic Benjamin-type equations"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::string config_path;
    std::vector<std::string> overrides;
    std::vector<std::string> files;
    bool quiet = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Config document (key = value)")->required();
        sub->add_option("--override", overrides, "Replace a config entry, key=value (repeatable)");
        sub->add_flag("--quiet", quiet, "Suppress progress messages");
    };
    CLI::App* solve = app.add_subcommand("solve", "Evolve initial data, write snapshots and invariants");
    CLI::App* converge = app.add_subcommand("converge", "Spatial convergence study");
    CLI::App* soliton = app.add_subcommand("soliton", "Compute and propagate a traveling wave");
    CLI::App* invariants = app.add_subcommand("invariants", "Recompute C, I, E for snapshot files");
    for (CLI::App* sub : {solve, converge, soliton, invariants}) add_common(sub);
    invariants->add_option("files", files, "Snapshot files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    CommandOptions opts;
    opts.quiet = quiet;
    RunConfig config;
    try {
        opts.threads = threads_from_env();
        config = load_config(config_path, overrides, ParseOptions{.require_grid = !invariants->parsed()});
    } catch (const std::exception& e) {
        std::cerr << "benj: " << e.what() << '\n';
        return kExitValidation;
    }

    if (solve->parsed()) return cmd_solve(config, opts);
    if (converge->parsed()) return cmd_converge(config, opts);
    if (soliton->parsed()) return cmd_soliton(config, opts);
    return cmd_invariants(config.model, files, std::cout, opts);
}
