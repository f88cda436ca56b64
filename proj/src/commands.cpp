#include <cstddef>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "irswarm/cli.hpp"

namespace irswarm::cli {

namespace {

std::optional<std::string> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string seed_trace_path(const std::string& path, std::uint64_t seed) {
    const std::filesystem::path p(path);
    auto name = p.stem().string() + fmt::format(".seed{}", seed) + p.extension().string();
    return (p.parent_path() / name).string();
}

// Parse + validate; on failure reports and returns the exit status.
std::variant<sim::Scenario, int> load(const std::string& path, std::ostream& err) {
    const auto text = read_file(path);
    if (!text) {
        err << fmt::format("error: cannot read scenario file '{}'\n", path);
        return kExitIo;
    }
    try {
        return parse_scenario(*text);
    } catch (const ParseError& e) {
        err << fmt::format("{}: {}\n", path, e.what());
        return kExitInvalid;
    }
}

}  // namespace

int command_validate(const std::string& scenario_path, std::ostream& out, std::ostream& err) {
    auto loaded = load(scenario_path, err);
    if (auto* status = std::get_if<int>(&loaded)) return *status;
    const auto violations = std::get<sim::Scenario>(loaded).violations();
    if (violations.empty()) {
        out << "OK\n";
        return kExitOk;
    }
    for (const auto& v : violations) out << "violation: " << v << '\n';
    return kExitInvalid;
}

int command_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    if (config.sweep < 1) {
        err << "error: --sweep must be >= 1\n";
        return kExitInvalid;
    }
    auto loaded = load(config.scenario_path, err);
    if (auto* status = std::get_if<int>(&loaded)) return *status;
    auto scenario = std::get<sim::Scenario>(std::move(loaded));
    if (config.steps) scenario.steps = *config.steps;

    if (const auto v = scenario.violations(); !v.empty()) {
        for (const auto& msg : v) err << "violation: " << msg << '\n';
        return kExitInvalid;
    }

    const auto n = static_cast<std::ptrdiff_t>(config.sweep);
    std::vector<sim::RunResult> results(static_cast<std::size_t>(n));
    std::vector<std::string> failures(static_cast<std::size_t>(n));
    const sim::RunOptions options{config.trace_path.has_value(), sim::Execution::Serial};

#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            results[k] = sim::run(scenario, config.seed + k, options);
        } catch (const std::exception& e) {
            failures[k] = e.what();
        }
    }
    for (std::size_t k = 0; k < failures.size(); ++k) {
        if (!failures[k].empty()) {
            err << fmt::format("error: seed {}: {}\n", config.seed + k, failures[k]);
            return kExitInvalid;
        }
    }

    // Rows in seed order regardless of which finished first.
    std::ofstream metrics(config.metrics_path, std::ios::binary | std::ios::trunc);
    if (!metrics) {
        err << fmt::format("error: cannot write metrics file '{}'\n", config.metrics_path);
        return kExitIo;
    }
    write_metrics_header(metrics);
    for (const auto& r : results) write_metrics_row(metrics, r.metrics);
    metrics.close();
    if (!metrics) {
        err << fmt::format("error: failed writing '{}'\n", config.metrics_path);
        return kExitIo;
    }

    if (config.trace_path) {
        for (const auto& r : results) {
            const auto path = config.sweep == 1 ? *config.trace_path : seed_trace_path(*config.trace_path, r.metrics.seed);
            std::ofstream trace(path, std::ios::binary | std::ios::trunc);
            if (!trace) {
                err << fmt::format("error: cannot write trace file '{}'\n", path);
                return kExitIo;
            }
            write_trace_csv(trace, r.trace);
            trace.close();
            if (!trace) {
                err << fmt::format("error: failed writing '{}'\n", path);
                return kExitIo;
            }
        }
    }

    out << fmt::format("ran {} seed(s) from {}, {} ticks each; metrics -> {}\n", config.sweep, config.seed,
                       scenario.steps, config.metrics_path);
    return kExitOk;
}

}  // namespace irswarm::cli
