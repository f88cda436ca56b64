#include "irswarm/agent.hpp"

#include <cmath>
#include <numbers>

#include "irswarm/error.hpp"
#include "irswarm/geometry.hpp"

namespace irswarm::agent {

namespace {

constexpr double kDegenerateResultant = 1e-9;
constexpr double kAvoidanceTurnDeg = 90.0;

}  // namespace

const char* kind_name(const Classification& c) noexcept {
    switch (c.index()) {
        case 0: return "obstacle";
        case 1: return "familiar";
        case 2: return "unknown";
        default: return "no_detection";
    }
}

AgentState make_agent(RobotId id, Pose pose, std::span<const RobotId> known, int slot_index,
                      double d_avoid) {
    AgentState s;
    s.id = id;
    s.database.insert(known.begin(), known.end());
    s.database.insert(id);
    s.pose = pose;
    s.slot_index = slot_index;
    s.d_avoid = d_avoid;
    return s;
}

Classification classify(const AgentState& agent, const Reception& reception,
                        const codec::DecodeResult& decoded, const channel::ChannelParams& params) {
    if (const auto* echo = std::get_if<channel::Echo>(&reception)) {
        require(agent.last_emitted.has_value() && echo->codeword == *agent.last_emitted,
                "echo must carry the agent's own last emission");
        return Obstacle{channel::estimate_distance(echo->intensity, params.assumed_reflectivity, params)};
    }
    if (std::holds_alternative<channel::Corrupted>(reception)) {
        return Unknown{};
    }
    const auto* frame = std::get_if<Frame>(&decoded);
    if (!frame) {
        return Unknown{};
    }
    const RobotId sender = codec::sender_of(*frame);
    if (agent.database.contains(sender)) {
        return Familiar{sender};
    }
    return Unknown{};
}

Classification classify(const AgentState& agent, const Reception& reception,
                        const channel::ChannelParams& params) {
    const Codeword cw = std::visit([](const auto& r) { return r.codeword; }, reception);
    return classify(agent, reception, codec::decode_frame(cw), params);
}

std::optional<double> circular_mean(std::span<const double> angles_deg) {
    require(!angles_deg.empty(), "circular_mean needs at least one angle");
    double s = 0.0;
    double c = 0.0;
    for (double a : angles_deg) {
        const auto u = geometry::unit_from_deg(a);
        c += u.x;
        s += u.y;
    }
    const double n = static_cast<double>(angles_deg.size());
    s /= n;
    c /= n;
    if (std::hypot(s, c) < kDegenerateResultant) return std::nullopt;
    return geometry::normalize_deg(std::atan2(s, c) * 180.0 / std::numbers::pi);
}

bool may_transmit(const AgentState& agent, long tick, int n_slots) {
    require(n_slots >= 1, "n_slots must be at least 1");
    require(agent.slot_index >= 0 && agent.slot_index < n_slots, "slot index out of range");
    require(tick >= 0, "tick must be non-negative");
    return tick % n_slots == agent.slot_index;
}

Frame next_frame(const AgentState& agent) {
    if (agent.neighbors.empty() || agent.transmit_occasions % 2 == 0) {
        return codec::Beacon{agent.id};
    }
    const auto n = static_cast<int>(agent.neighbors.size());
    auto it = agent.neighbors.begin();
    std::advance(it, agent.heading_send_cursor % n);
    return codec::Heading{agent.id, it->first.value(),
                          codec::quantize_heading(agent.pose.heading_deg)};
}

AgentOutput step_agent(const AgentState& agent, std::span<const Reception> inbox, long tick,
                       const StepContext& ctx) {
    AgentOutput out{agent, std::nullopt, {}};
    AgentState& s = out.state;

    std::vector<double> received_headings;
    std::optional<double> closest_obstacle;

    if (inbox.empty()) {
        out.events.emplace_back(Classification{NoDetection{}});
    }
    for (const auto& reception : inbox) {
        const Codeword cw = std::visit([](const auto& r) { return r.codeword; }, reception);
        const auto decoded = codec::decode_frame(cw);
        const Classification verdict = classify(agent, reception, decoded, ctx.channel);
        out.events.emplace_back(verdict);

        if (const auto* o = std::get_if<Obstacle>(&verdict)) {
            if (!closest_obstacle || o->estimated_distance < *closest_obstacle) {
                closest_obstacle = o->estimated_distance;
            }
            continue;
        }
        if (!std::holds_alternative<Familiar>(verdict)) continue;

        const auto& frame = std::get<Frame>(decoded);
        const auto& clean = std::get<channel::Clean>(reception);
        if (const auto* b = std::get_if<codec::Beacon>(&frame)) {
            s.neighbors[b->sender] = NeighborEntry{b->sender, clean.bearing_deg, tick};
        } else if (const auto* h = std::get_if<codec::Heading>(&frame)) {
            const bool to_me = h->target == agent.id.value();
            const bool broadcast = ctx.accept_broadcast_headings && h->target == codec::kBroadcast;
            if (to_me || broadcast) {
                received_headings.push_back(codec::dequantize_heading(h->heading_q));
            }
        }
    }

    if (!received_headings.empty()) {
        std::vector<double> all{s.pose.heading_deg};
        all.insert(all.end(), received_headings.begin(), received_headings.end());
        if (auto mean = circular_mean(all)) {
            const double old = s.pose.heading_deg;
            s.pose.heading_deg = *mean;
            out.events.emplace_back(HeadingUpdated{old, *mean});
        }
    }

    if (closest_obstacle && *closest_obstacle < s.d_avoid) {
        const double old = s.pose.heading_deg;
        s.pose.heading_deg = geometry::normalize_deg(old + kAvoidanceTurnDeg);
        out.events.emplace_back(AvoidanceTurn{old, s.pose.heading_deg, *closest_obstacle});
    }

    if (may_transmit(s, tick, ctx.n_slots)) {
        const Frame frame = next_frame(s);
        s.last_emitted = codec::encode_frame(frame);
        if (std::holds_alternative<codec::Heading>(frame)) ++s.heading_send_cursor;
        ++s.transmit_occasions;
        out.intent = frame;
    }
    return out;
}

}  // namespace irswarm::agent
