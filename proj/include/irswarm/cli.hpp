#pragma once

// Scenario files, CSV outputs and the `run` / `validate` commands.
//
// Scenario format: UTF-8 text, `#` starts a comment, `[section]` headers,
// whitespace-separated `key=value` tokens (several per line allowed).
//
//   [world]    width height
//   [channel]  range cone_half_angle_deg base_intensity min_distance
//              bit_error_rate reflectivity_default
//   [agents]   count layout=grid|random|explicit motion=on|off speed d_avoid
//              heading_min_deg heading_max_deg
//              agent=<id>,<x>,<y>,<heading_deg>
//              intruder=<id>,<x>,<y>,<heading_deg>
//   [protocol] n_slots=<int>|auto alignment_epsilon_deg accept_broadcast=on|off
//   [run]      steps
//   obstacle=<x1>,<y1>,<x2>,<y2>[,<reflectivity>]   (any section)

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "irswarm/sim.hpp"

namespace irswarm::cli {

class ParseError : public std::runtime_error {
public:
    ParseError(int line, std::string key, const std::string& message);
    int line() const noexcept { return line_; }
    const std::string& key() const noexcept { return key_; }

private:
    int line_;
    std::string key_;
};

/// Throws ParseError. Unspecified keys keep the Scenario defaults.
sim::Scenario parse_scenario(const std::string& text);

/// Canonical text form; parse_scenario(render_scenario(s)) == s.
std::string render_scenario(const sim::Scenario& scenario);

void write_trace_csv(std::ostream& out, std::span<const sim::TraceEvent> trace);
void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const sim::Metrics& metrics);

struct RunConfig {
    std::string scenario_path;
    std::uint64_t seed = 0;
    std::optional<long> steps;
    std::optional<std::string> trace_path;
    std::string metrics_path;
    int sweep = 1;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitIo = 3;

/// Runs seeds [seed, seed + sweep) and writes one metrics row per seed, in
/// seed order. With a sweep, seed N's trace goes to `<stem>.seedN<ext>`.
int command_run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Prints "OK" or one violation per line.
int command_validate(const std::string& scenario_path, std::ostream& out, std::ostream& err);

}  // namespace irswarm::cli
