// Command-line front end: semicomp <subcommand> --config <path> [--out <dir>] [--seed <u64>]

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "semicomp/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Semi-compressible flow solver with adjoint-based optimal control"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 1;
    for (const auto& name : semicomp::subcommands()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_dir, "output directory (default: output.dir from the config)");
        sub->add_option("--seed", seed, "seed for random directions")->capture_default_str();
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return semicomp::kExitUsage;
    }
    const std::string sub = app.get_subcommands().front()->get_name();
    return semicomp::run_cli(sub, config_path, out_dir, seed, std::cout, std::cerr);
}
