#pragma once

// Deterministic tick loop over a swarm.
//
// Each tick has three phases. A: every agent steps on the inbox built from the
// previous tick's transmissions (all agents read the same snapshot). B: the
// transmission intents are encoded and become this tick's transmissions.
// C: with motion on, agents move along their heading and bounce off the
// arena walls.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "irswarm/agent.hpp"
#include "irswarm/channel.hpp"
#include "irswarm/rng.hpp"

namespace irswarm::sim {

using channel::ChannelParams;
using channel::ObstacleSegment;
using channel::Pose;
using codec::RobotId;

enum class Layout { Grid, Random, Explicit };

const char* to_string(Layout layout) noexcept;

/// One agent declared in a scenario. Intruders run the same controller but
/// nobody else has their id in its database, and they know only themselves.
struct AgentSpec {
    RobotId id;
    Pose pose;
    bool intruder = false;
    friend bool operator==(const AgentSpec&, const AgentSpec&) = default;
};

struct Scenario {
    double width = 10.0;
    double height = 10.0;
    std::vector<ObstacleSegment> obstacles;
    ChannelParams channel;

    Layout layout = Layout::Grid;
    int count = 10;  ///< generated agents for grid/random layouts (ids 1..count)
    /// Generated headings are uniform in [heading_min_deg, heading_max_deg).
    double heading_min_deg = 0.0;
    double heading_max_deg = 360.0;
    /// Explicit agents (layout=explicit) and intruders (any layout).
    std::vector<AgentSpec> agents;

    bool motion = false;
    double speed = 0.05;  ///< meters per tick
    double d_avoid = 0.5;

    std::optional<int> n_slots;  ///< nothing = one slot per agent
    double alignment_epsilon_deg = 3.0;
    bool accept_broadcast_headings = false;

    long steps = 1000;

    /// Every violated invariant, one message each; empty when valid.
    std::vector<std::string> violations() const;
    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Thrown by run() for a scenario with violations.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// Concrete agent list for a run, sorted by id. Grid and random layouts draw
/// their headings (and random positions) from `seed`.
std::vector<AgentSpec> materialize_agents(const Scenario& scenario, std::uint64_t seed);

int effective_slots(const Scenario& scenario, std::size_t agent_count) noexcept;

struct WorldState {
    long tick = 0;
    std::vector<agent::AgentState> agents;  ///< sorted by id
    std::vector<bool> intruder;             ///< parallel to agents
    std::vector<channel::Transmission> transmissions;  ///< emitted during tick - 1
};

WorldState make_world(const Scenario& scenario, std::uint64_t seed);

enum class EventKind { Transmit, Receive, Classify, HeadingUpdate, Avoidance, Move };

const char* to_string(EventKind kind) noexcept;

/// One CSV row of the trace. Empty optionals render as empty cells.
struct TraceEvent {
    long tick = 0;
    int agent_id = 0;
    EventKind kind = EventKind::Transmit;
    std::string frame_type;
    std::optional<int> sender;
    std::optional<int> target;
    std::string classification;
    std::optional<double> value_a;
    std::optional<double> value_b;
    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

enum class Execution { Serial, Parallel };

/// Everything that happened in one tick, per agent (same order as WorldState::agents).
struct TickRecord {
    long tick = 0;
    channel::Inboxes inboxes;
    std::vector<std::vector<agent::AgentEvent>> events;
    std::vector<std::optional<codec::Frame>> intents;
};

/// `noise` is the run's noise root; tick t uses noise.derive({t}).
WorldState step_world(const WorldState& world, const Scenario& scenario, const RandomStream& noise,
                      std::vector<TraceEvent>* trace = nullptr, TickRecord* record = nullptr,
                      Execution execution = Execution::Parallel);

/// Largest angular distance from any heading to the circular mean; 180 when
/// the mean is undefined. Throws ContractViolation on an empty list.
double heading_spread(std::span<const double> headings_deg);

/// Rows and columns: obstacle, familiar, unknown, no_detection.
using ConfusionMatrix = std::array<std::array<long, 4>, 4>;

struct Metrics {
    std::uint64_t seed = 0;
    long total_receptions = 0;  ///< signal receptions; echoes are not messages
    long decode_failures = 0;
    double message_loss_rate = 0.0;
    long collisions = 0;
    std::optional<long> time_to_alignment;
    double final_spread_deg = 0.0;
    ConfusionMatrix confusion{};
    long wrong_peer = 0;  ///< familiar verdicts naming the wrong robot
    long misclassifications = 0;
    /// Member heading spread after every tick, index 0 = initial state.
    std::vector<double> spread_history;
};

struct RunResult {
    Metrics metrics;
    std::vector<TraceEvent> trace;
};

struct RunOptions {
    bool record_trace = true;
    Execution execution = Execution::Parallel;
};

/// Throws ValidationError for an invalid scenario.
RunResult run(const Scenario& scenario, std::uint64_t seed, const RunOptions& options = {});

}  // namespace irswarm::sim
