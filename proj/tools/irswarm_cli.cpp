#include <iostream>

#include <CLI11.hpp>

#include "irswarm/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"irswarm: IR-signalling swarm simulator"};
    app.require_subcommand(1);

    irswarm::cli::RunConfig config;
    std::optional<long> steps;
    std::string trace;
    auto* run = app.add_subcommand("run", "simulate a scenario for one or more seeds");
    run->add_option("--scenario", config.scenario_path, "scenario file")->required();
    run->add_option("--seed", config.seed, "first seed")->required();
    run->add_option("--sweep", config.sweep, "number of consecutive seeds")->check(CLI::PositiveNumber);
    run->add_option("--steps", steps, "override [run] steps");
    run->add_option("--trace", trace, "trace CSV output");
    run->add_option("--metrics", config.metrics_path, "metrics CSV output")->required();

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "check a scenario file");
    validate->add_option("--scenario", validate_path, "scenario file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (run->parsed()) {
        config.steps = steps;
        if (!trace.empty()) config.trace_path = trace;
        return irswarm::cli::command_run(config, std::cout, std::cerr);
    }
    return irswarm::cli::command_validate(validate_path, std::cout, std::cerr);
}
