// Experiment runner for the stochastic heat equation laboratory.
//
//   spdelab <subcommand> [--config PATH] [--set KEY=VALUE]... [--threads N]
//           [--out DIR] [--seed U64]
//
// Subcommands: assemble-check, operator-check, ito-check, strong-rate,
// weak-rate, all. Exit 0 when every acceptance check in the suite passes,
// 2 on a check failure, 1 on configuration or runtime errors.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "spdelab/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"spdelab: semidiscrete stochastic heat equation laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    int threads = -1;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;

    app.add_option("--config", config_path, "configuration file (key = value sections)");
    app.add_option("--set", overrides, "override, repeatable: --set section.key=value");
    app.add_option("--threads", threads, "worker threads (0 = hardware)");
    app.add_option("--out", out_dir, "output directory (overrides env and config)");
    app.add_option("--seed", seed, "random seed")->each([&](const std::string&) {
        seed_set = true;
    });

    for (const char* name : {"assemble-check", "operator-check", "ito-check", "strong-rate",
                             "weak-rate", "all"})
        app.add_subcommand(name);

    CLI11_PARSE(app, argc, argv);
    const std::string subcommand = app.get_subcommands().front()->get_name();

    try {
        spdelab::cli::Config cfg = config_path.empty()
                                       ? spdelab::cli::Config::defaults()
                                       : spdelab::cli::Config::parse_file(config_path);
        cfg.merge_missing_from(spdelab::cli::Config::defaults());
        for (const auto& o : overrides) cfg.apply_override(o);
        // Flags win over file and --set; the environment only supplies the
        // output directory when no flag is present.
        if (threads >= 0) cfg.set("experiment.threads", std::to_string(threads), "<flag>");
        if (seed_set) cfg.set("experiment.seed", std::to_string(seed), "<flag>");
        if (!out_dir.empty())
            cfg.set("output.dir", out_dir, "<flag>");
        else if (const char* env = std::getenv("SPDELAB_OUT"))
            cfg.set("output.dir", env, "<env>");

        const auto result = spdelab::cli::run_suite(subcommand, cfg, std::cout);
        return result.exit_code;
    } catch (const spdelab::cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
