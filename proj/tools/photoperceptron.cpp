// Command-line runner for the photoperceptron experiments.
//
//   photoperceptron <experiment> --config <file> [--seed N] [--out-dir D] [--threads T]
//
// Exit codes: 0 success, 2 invalid configuration, 3 runtime failure.
// PHOTOPERCEPTRON_OUT_DIR overrides the config's out_dir (the --out-dir flag
// wins over both).

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "photoperceptron/experiment.hpp"

namespace ppx = photoperceptron::experiment;

int main(int argc, char** argv) {
    CLI::App app{"photoperceptron: physical learning machine experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int threads = 0;
    bool seed_given = false, out_given = false, threads_given = false;

    std::string selected;
    for (const auto& name : ppx::experiment_names()) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config_path, "path to the experiment JSON config")
            ->required();
        sub->add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
            seed_given = true;
        });
        sub->add_option("--out-dir", out_dir, "output directory override")
            ->each([&](const std::string&) { out_given = true; });
        sub->add_option("--threads", threads, "worker threads (never affects results)")
            ->each([&](const std::string&) { threads_given = true; });
        sub->callback([&, name] { selected = name; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        auto config = ppx::detail::load_json_file(config_path);
        const std::string in_config =
            ppx::detail::get_or<std::string>(config, "experiment", selected);
        if (in_config != selected)
            throw ppx::ConfigError("config selects experiment '" + in_config +
                                   "' but the command line asked for '" + selected + "'");
        config["experiment"] = selected;

        ppx::RunOptions options;
        if (seed_given) options.seed_override = seed;
        if (out_given) options.out_dir_override = out_dir;
        if (threads_given) options.threads_override = threads;

        const auto manifest = ppx::run(config, options);
        std::cout << selected << ": wrote " << manifest.artifacts.size() << " artifacts in "
                  << manifest.wall_time_s << " s\n";
        for (const auto& a : manifest.artifacts)
            std::cout << "  " << a.name << "  " << a.bytes << " bytes  sha256:" << a.sha256
                      << "\n";
        return 0;
    } catch (const ppx::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 3;
    }
}
