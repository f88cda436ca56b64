#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "irswarm/cli.hpp"

namespace irswarm::cli {

namespace {

using sim::Layout;
using sim::Scenario;

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& text, int line, const std::string& key) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (text.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v)) {
        throw ParseError(line, key, fmt::format("'{}' is not a number", text));
    }
    return v;
}

long parse_integer(const std::string& text, int line, const std::string& key) {
    long v = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (text.empty() || ec != std::errc{} || ptr != last) {
        throw ParseError(line, key, fmt::format("'{}' is not an integer", text));
    }
    return v;
}

bool parse_switch(const std::string& text, int line, const std::string& key) {
    if (text == "on" || text == "true" || text == "1") return true;
    if (text == "off" || text == "false" || text == "0") return false;
    throw ParseError(line, key, fmt::format("'{}' is not on/off", text));
}

std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(text);
    while (std::getline(in, field, ',')) out.push_back(trim(field));
    if (!text.empty() && text.back() == ',') out.emplace_back();
    return out;
}

sim::AgentSpec parse_agent_row(const std::string& value, int line, const std::string& key,
                               bool intruder) {
    const auto f = split_commas(value);
    if (f.size() != 4) {
        throw ParseError(line, key, fmt::format("expected <id>,<x>,<y>,<heading_deg>, got '{}'", value));
    }
    const long id = parse_integer(f[0], line, key);
    if (id < 0 || id > 254) throw ParseError(line, key, fmt::format("agent id {} outside 0..254", id));
    const double x = parse_number(f[1], line, key);
    const double y = parse_number(f[2], line, key);
    const double h = parse_number(f[3], line, key);
    return {codec::RobotId{static_cast<int>(id)}, channel::Pose{{x, y}, h}, intruder};
}

channel::ObstacleSegment parse_obstacle_row(const std::string& value, int line,
                                            const std::string& key, std::optional<double>& explicit_rho) {
    const auto f = split_commas(value);
    if (f.size() != 4 && f.size() != 5) {
        throw ParseError(line, key, fmt::format("expected <x1>,<y1>,<x2>,<y2>[,<reflectivity>], got '{}'", value));
    }
    channel::ObstacleSegment o;
    o.a = {parse_number(f[0], line, key), parse_number(f[1], line, key)};
    o.b = {parse_number(f[2], line, key), parse_number(f[3], line, key)};
    explicit_rho.reset();
    if (f.size() == 5) explicit_rho = parse_number(f[4], line, key);
    return o;
}

}  // namespace

ParseError::ParseError(int line, std::string key, const std::string& message)
    : std::runtime_error(fmt::format("line {}: {}: {}", line, key, message)),
      line_(line),
      key_(std::move(key)) {}

Scenario parse_scenario(const std::string& text) {
    Scenario s;
    std::string section;
    std::optional<Layout> layout;
    bool count_given = false;

    struct Row {
        int line;
        std::string key;
    };
    std::vector<Row> agent_rows;
    std::vector<std::optional<double>> obstacle_rho;
    std::map<std::string, int> seen;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::string rest = trim(raw);
        if (rest.empty()) continue;

        if (rest.front() == '[') {
            const auto close = rest.find(']');
            if (close == std::string::npos) throw ParseError(line_no, rest, "unterminated section header");
            section = trim(std::string_view(rest).substr(1, close - 1));
            static const char* kSections[] = {"world", "channel", "agents", "protocol", "run"};
            if (std::find(std::begin(kSections), std::end(kSections), section) == std::end(kSections)) {
                throw ParseError(line_no, section, "unknown section");
            }
            rest = trim(std::string_view(rest).substr(close + 1));
        }

        std::istringstream tokens(rest);
        std::string token;
        while (tokens >> token) {
            const auto eq = token.find('=');
            if (eq == std::string::npos || eq == 0) {
                throw ParseError(line_no, token, "expected key=value");
            }
            const std::string key = token.substr(0, eq);
            const std::string value = token.substr(eq + 1);
            const int line = line_no;

            if (key == "obstacle") {
                std::optional<double> rho;
                s.obstacles.push_back(parse_obstacle_row(value, line, key, rho));
                obstacle_rho.push_back(rho);
                continue;
            }
            if (section.empty()) throw ParseError(line, key, "key outside of any section");

            const std::string qualified = section + "." + key;
            if (key != "agent" && key != "intruder") {
                if (auto [it, fresh] = seen.emplace(qualified, line); !fresh) {
                    throw ParseError(line, key, fmt::format("repeated key (first set on line {})", it->second));
                }
            }

            if (section == "world") {
                if (key == "width") s.width = parse_number(value, line, key);
                else if (key == "height") s.height = parse_number(value, line, key);
                else throw ParseError(line, key, "unknown key in [world]");
            } else if (section == "channel") {
                auto& c = s.channel;
                if (key == "range") c.range = parse_number(value, line, key);
                else if (key == "cone_half_angle_deg") c.cone_half_angle_deg = parse_number(value, line, key);
                else if (key == "base_intensity") c.base_intensity = parse_number(value, line, key);
                else if (key == "min_distance") c.min_distance = parse_number(value, line, key);
                else if (key == "bit_error_rate") c.bit_error_rate = parse_number(value, line, key);
                else if (key == "reflectivity_default") c.assumed_reflectivity = parse_number(value, line, key);
                else throw ParseError(line, key, "unknown key in [channel]");
            } else if (section == "agents") {
                if (key == "count") {
                    const long n = parse_integer(value, line, key);
                    if (n < 0 || n > 254) throw ParseError(line, key, fmt::format("count {} outside 0..254", n));
                    s.count = static_cast<int>(n);
                    count_given = true;
                } else if (key == "layout") {
                    if (value == "grid") layout = Layout::Grid;
                    else if (value == "random") layout = Layout::Random;
                    else if (value == "explicit") layout = Layout::Explicit;
                    else throw ParseError(line, key, fmt::format("'{}' is not grid, random or explicit", value));
                } else if (key == "motion") {
                    s.motion = parse_switch(value, line, key);
                } else if (key == "speed") {
                    s.speed = parse_number(value, line, key);
                } else if (key == "d_avoid") {
                    s.d_avoid = parse_number(value, line, key);
                } else if (key == "heading_min_deg") {
                    s.heading_min_deg = parse_number(value, line, key);
                } else if (key == "heading_max_deg") {
                    s.heading_max_deg = parse_number(value, line, key);
                } else if (key == "agent" || key == "intruder") {
                    s.agents.push_back(parse_agent_row(value, line, key, key == "intruder"));
                    agent_rows.push_back({line, key});
                } else {
                    throw ParseError(line, key, "unknown key in [agents]");
                }
            } else if (section == "protocol") {
                if (key == "n_slots") {
                    if (value == "auto") s.n_slots.reset();
                    else s.n_slots = static_cast<int>(parse_integer(value, line, key));
                } else if (key == "alignment_epsilon_deg") {
                    s.alignment_epsilon_deg = parse_number(value, line, key);
                } else if (key == "accept_broadcast") {
                    s.accept_broadcast_headings = parse_switch(value, line, key);
                } else {
                    throw ParseError(line, key, "unknown key in [protocol]");
                }
            } else if (section == "run") {
                if (key == "steps") s.steps = parse_integer(value, line, key);
                else throw ParseError(line, key, "unknown key in [run]");
            }
        }
    }

    const bool has_member_rows = std::any_of(s.agents.begin(), s.agents.end(),
                                             [](const sim::AgentSpec& a) { return !a.intruder; });
    s.layout = layout.value_or(has_member_rows && !count_given ? Layout::Explicit : Layout::Grid);
    if (s.layout == Layout::Explicit && !count_given) s.count = 0;

    for (std::size_t i = 0; i < s.obstacles.size(); ++i) {
        s.obstacles[i].reflectivity = obstacle_rho[i].value_or(s.channel.assumed_reflectivity);
    }

    // Row-level checks that need the whole file (arena size may come later).
    std::map<int, int> id_line;
    if (s.layout != Layout::Explicit) {
        for (int id = 1; id <= s.count; ++id) id_line.emplace(id, 0);
    }
    for (std::size_t i = 0; i < s.agents.size(); ++i) {
        const auto& a = s.agents[i];
        const auto& row = agent_rows[i];
        const int id = a.id.value();
        if (!a.intruder && s.layout != Layout::Explicit) {
            throw ParseError(row.line, row.key, "agent rows need layout=explicit");
        }
        if (auto [it, fresh] = id_line.emplace(id, row.line); !fresh) {
            throw ParseError(row.line, row.key,
                             it->second > 0
                                 ? fmt::format("duplicate agent id {} (first on line {})", id, it->second)
                                 : fmt::format("duplicate agent id {} (taken by the generated layout)", id));
        }
        const auto p = a.pose.position;
        if (p.x < 0.0 || p.x > s.width || p.y < 0.0 || p.y > s.height) {
            throw ParseError(row.line, row.key,
                             fmt::format("agent {} at ({}, {}) is outside the {} x {} arena", id, p.x, p.y,
                                         s.width, s.height));
        }
    }
    return s;
}

std::string render_scenario(const Scenario& s) {
    std::string out;
    auto line = [&out](const std::string& l) {
        out += l;
        out += '\n';
    };
    line("[world]");
    line(fmt::format("width={}", s.width));
    line(fmt::format("height={}", s.height));
    for (const auto& o : s.obstacles) {
        line(fmt::format("obstacle={},{},{},{},{}", o.a.x, o.a.y, o.b.x, o.b.y, o.reflectivity));
    }
    line("[channel]");
    line(fmt::format("range={}", s.channel.range));
    line(fmt::format("cone_half_angle_deg={}", s.channel.cone_half_angle_deg));
    line(fmt::format("base_intensity={}", s.channel.base_intensity));
    line(fmt::format("min_distance={}", s.channel.min_distance));
    line(fmt::format("bit_error_rate={}", s.channel.bit_error_rate));
    line(fmt::format("reflectivity_default={}", s.channel.assumed_reflectivity));
    line("[agents]");
    line(fmt::format("layout={}", sim::to_string(s.layout)));
    line(fmt::format("count={}", s.count));
    line(fmt::format("motion={}", s.motion ? "on" : "off"));
    line(fmt::format("speed={}", s.speed));
    line(fmt::format("d_avoid={}", s.d_avoid));
    line(fmt::format("heading_min_deg={}", s.heading_min_deg));
    line(fmt::format("heading_max_deg={}", s.heading_max_deg));
    for (const auto& a : s.agents) {
        line(fmt::format("{}={},{},{},{}", a.intruder ? "intruder" : "agent", a.id.value(), a.pose.position.x,
                         a.pose.position.y, a.pose.heading_deg));
    }
    line("[protocol]");
    line(s.n_slots ? fmt::format("n_slots={}", *s.n_slots) : std::string("n_slots=auto"));
    line(fmt::format("alignment_epsilon_deg={}", s.alignment_epsilon_deg));
    line(fmt::format("accept_broadcast={}", s.accept_broadcast_headings ? "on" : "off"));
    line("[run]");
    line(fmt::format("steps={}", s.steps));
    return out;
}

}  // namespace irswarm::cli
