#pragma once

// Per-robot controller.
//
// Every tick a robot classifies what it heard (own code back = obstacle, a
// known code = familiar peer, anything else = unknown, silence = nothing in
// front), records where known peers' beacons came from, averages its heading
// with headings addressed to it, turns away from close obstacles, and, in its
// own time slot, emits either its id or its heading.

#include <map>
#include <optional>
#include <set>
#include <span>
#include <variant>
#include <vector>

#include "irswarm/channel.hpp"
#include "irswarm/codec.hpp"

namespace irswarm::agent {

using channel::Pose;
using channel::Reception;
using codec::Codeword;
using codec::Frame;
using codec::RobotId;

struct Obstacle {
    double estimated_distance = 0.0;
    friend bool operator==(const Obstacle&, const Obstacle&) = default;
};
struct Familiar {
    RobotId peer;
    friend bool operator==(const Familiar&, const Familiar&) = default;
};
struct Unknown {
    friend bool operator==(const Unknown&, const Unknown&) = default;
};
struct NoDetection {
    friend bool operator==(const NoDetection&, const NoDetection&) = default;
};

using Classification = std::variant<Obstacle, Familiar, Unknown, NoDetection>;

const char* kind_name(const Classification& c) noexcept;

struct NeighborEntry {
    RobotId peer;
    double bearing_deg = 0.0;
    long last_seen = 0;
    friend bool operator==(const NeighborEntry&, const NeighborEntry&) = default;
};

struct AgentState {
    RobotId id;
    std::set<RobotId> database;  ///< the "IR database"; always contains id
    Pose pose;
    std::map<RobotId, NeighborEntry> neighbors;
    int slot_index = 0;
    std::optional<Codeword> last_emitted;
    int heading_send_cursor = 0;
    long transmit_occasions = 0;
    double d_avoid = 0.5;

    friend bool operator==(const AgentState&, const AgentState&) = default;
};

/// Builds a state whose database is `known` plus the agent's own id.
AgentState make_agent(RobotId id, Pose pose, std::span<const RobotId> known, int slot_index,
                      double d_avoid);

struct HeadingUpdated {
    double old_deg = 0.0;
    double new_deg = 0.0;
    friend bool operator==(const HeadingUpdated&, const HeadingUpdated&) = default;
};
struct AvoidanceTurn {
    double old_deg = 0.0;
    double new_deg = 0.0;
    double obstacle_distance = 0.0;
    friend bool operator==(const AvoidanceTurn&, const AvoidanceTurn&) = default;
};

using AgentEvent = std::variant<Classification, HeadingUpdated, AvoidanceTurn>;

struct AgentOutput {
    AgentState state;
    std::optional<Frame> intent;
    std::vector<AgentEvent> events;
    friend bool operator==(const AgentOutput&, const AgentOutput&) = default;
};

/// Fixed per-run inputs to step_agent().
struct StepContext {
    int n_slots = 1;
    channel::ChannelParams channel;
    /// Accept Heading frames addressed to 255 as well as to self.
    bool accept_broadcast_headings = false;
};

/// Decision tree over one reception. `decoded` is the decode of the
/// reception's codeword; it is ignored for echoes.
///
/// Throws ContractViolation for an echo that does not carry the agent's own
/// last emission.
Classification classify(const AgentState& agent, const Reception& reception,
                        const codec::DecodeResult& decoded, const channel::ChannelParams& params);

/// Convenience overload that decodes the reception itself.
Classification classify(const AgentState& agent, const Reception& reception,
                        const channel::ChannelParams& params);

/// Circular mean in [0, 360), or nothing when the resultant length is below 1e-9.
/// Throws ContractViolation on an empty list.
std::optional<double> circular_mean(std::span<const double> angles_deg);

bool may_transmit(const AgentState& agent, long tick, int n_slots);

Frame next_frame(const AgentState& agent);

AgentOutput step_agent(const AgentState& agent, std::span<const Reception> inbox, long tick,
                       const StepContext& ctx);

}  // namespace irswarm::agent
