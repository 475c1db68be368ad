#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ksgd/cli.hpp"
#include "ksgd/config.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Finite-volume simulator for chemotaxis with gradient-dependent damping"};
    app.require_subcommand(1);

    ksgd::CliOptions options;
    std::string config, out_dir, csv, image;

    auto* run = app.add_subcommand("run", "integrate one scenario");
    run->add_option("config", config, "configuration file")->required();
    run->add_option("out_dir", out_dir, "output directory")->required();
    run->add_flag("--dense", options.dense, "store every step and report the energy consistency defect");
    run->add_option("--threads", options.threads, "worker threads (unused by single runs)")->check(CLI::NonNegativeNumber);

    auto* sweep = app.add_subcommand("sweep", "run the cartesian product of the sweep axes");
    sweep->add_option("config", config, "configuration file")->required();
    sweep->add_option("out_dir", out_dir, "output directory")->required();
    sweep->add_flag("--dense", options.dense, "write run_<k>/ with the full output of every combination");
    sweep->add_option("--threads", options.threads, "worker threads (default: hardware concurrency)")
        ->check(CLI::NonNegativeNumber);

    auto* check = app.add_subcommand("check", "validate the hypotheses and print the derived constants");
    check->add_option("config", config, "configuration file")->required();

    auto* plot = app.add_subcommand("plot", "render series.csv or sweep.csv to a PPM image");
    plot->add_option("csv", csv, "input csv")->required();
    plot->add_option("image", image, "output .ppm")->required();

    auto* keys = app.add_subcommand("keys", "list the configuration keys and their defaults");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : ksgd::kExitConfig;
    }

    if (*run)
        return ksgd::cmd_run(config, out_dir, options, std::cout, std::cerr);
    if (*sweep)
        return ksgd::cmd_sweep(config, out_dir, options, std::cout, std::cerr);
    if (*check)
        return ksgd::cmd_check(config, std::cout, std::cerr);
    if (*plot)
        return ksgd::cmd_plot(csv, image, std::cerr);
    if (*keys) {
        for (const auto& k : ksgd::config_keys())
            std::cout << k.key << " = " << (k.default_value.empty() ? "(required)" : k.default_value) << "  # "
                      << k.description << '\n';
        return 0;
    }
    return ksgd::kExitConfig;
}
