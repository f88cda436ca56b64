#include "irswarm/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "irswarm/error.hpp"
#include "irswarm/geometry.hpp"

namespace irswarm::sim {

namespace {

// Substream keys under the run seed.
constexpr std::uint64_t kLayoutStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

// Confusion matrix rows/columns follow the Classification variant order.
constexpr int kObstacleRow = 0;
constexpr int kNoDetectionRow = 3;

bool inside_arena(const Scenario& s, geometry::Vec2 p) {
    return std::isfinite(p.x) && std::isfinite(p.y) && p.x >= 0.0 && p.x <= s.width &&
           p.y >= 0.0 && p.y <= s.height;
}

std::string reception_kind(const channel::Reception& r) {
    switch (r.index()) {
        case 0: return "clean";
        case 1: return "corrupted";
        default: return "echo";
    }
}

void append_trace(std::vector<TraceEvent>& trace, long tick, const agent::AgentState& before,
                  const std::vector<channel::Reception>& inbox,
                  const std::vector<agent::AgentEvent>& events,
                  const std::optional<codec::Frame>& intent, const std::optional<Pose>& moved_to) {
    const int id = before.id.value();

    for (const auto& r : inbox) {
        TraceEvent e{tick, id, EventKind::Receive, {}, {}, {}, {}, {}, {}};
        const auto cw = std::visit([](const auto& x) { return x.codeword; }, r);
        const auto decoded = codec::decode_frame(cw);
        if (const auto* f = std::get_if<codec::Frame>(&decoded)) {
            e.frame_type = reception_kind(r) + ":" +
                           (std::holds_alternative<codec::Beacon>(*f) ? "beacon" : "heading");
            e.sender = codec::sender_of(*f).value();
            if (const auto* h = std::get_if<codec::Heading>(f)) e.target = h->target;
        } else {
            e.frame_type = reception_kind(r) + ":" + codec::to_string(std::get<codec::DecodeFailure>(decoded));
        }
        std::visit(
            [&](const auto& x) {
                e.value_a = x.intensity;
                if constexpr (!std::is_same_v<std::decay_t<decltype(x)>, channel::Echo>) {
                    e.value_b = x.bearing_deg;
                }
            },
            r);
        trace.push_back(std::move(e));
    }

    for (const auto& ev : events) {
        TraceEvent e{tick, id, EventKind::Classify, {}, {}, {}, {}, {}, {}};
        if (const auto* c = std::get_if<agent::Classification>(&ev)) {
            e.classification = agent::kind_name(*c);
            if (const auto* o = std::get_if<agent::Obstacle>(c)) e.value_a = o->estimated_distance;
            if (const auto* f = std::get_if<agent::Familiar>(c)) e.sender = f->peer.value();
        } else if (const auto* h = std::get_if<agent::HeadingUpdated>(&ev)) {
            e.kind = EventKind::HeadingUpdate;
            e.value_a = h->old_deg;
            e.value_b = h->new_deg;
        } else {
            const auto& a = std::get<agent::AvoidanceTurn>(ev);
            e.kind = EventKind::Avoidance;
            e.value_a = a.old_deg;
            e.value_b = a.new_deg;
        }
        trace.push_back(std::move(e));
    }

    if (intent) {
        TraceEvent e{tick, id, EventKind::Transmit, {}, {}, {}, {}, {}, {}};
        e.sender = codec::sender_of(*intent).value();
        if (const auto* h = std::get_if<codec::Heading>(&*intent)) {
            e.frame_type = "heading";
            e.target = h->target;
            e.value_a = codec::dequantize_heading(h->heading_q);
        } else {
            e.frame_type = "beacon";
            e.target = codec::kBroadcast;
        }
        trace.push_back(std::move(e));
    }

    if (moved_to) {
        TraceEvent e{tick, id, EventKind::Move, {}, {}, {}, {}, {}, {}};
        e.value_a = moved_to->position.x;
        e.value_b = moved_to->position.y;
        trace.push_back(std::move(e));
    }
}

// Advance along the heading; a wall crossing mirrors the position back inside
// and inverts the heading component on that axis.
Pose move_agent(Pose p, double speed, double width, double height) {
    const auto dir = geometry::unit_from_deg(p.heading_deg);
    double x = p.position.x + speed * dir.x;
    double y = p.position.y + speed * dir.y;
    double h = p.heading_deg;
    if (x > width) {
        x = 2.0 * width - x;
        h = 180.0 - h;
    } else if (x < 0.0) {
        x = -x;
        h = 180.0 - h;
    }
    if (y > height) {
        y = 2.0 * height - y;
        h = -h;
    } else if (y < 0.0) {
        y = -y;
        h = -h;
    }
    p.position = {std::clamp(x, 0.0, width), std::clamp(y, 0.0, height)};
    p.heading_deg = geometry::normalize_deg(h);
    return p;
}

// --- ground truth ----------------------------------------------------------
//
// Re-derives, from positions and the obstacle list alone, what each agent
// should have concluded this tick. Agents never see any of this.

struct Truth {
    // Nothing: no code reached the receiver.
    std::optional<agent::Classification> signal;
    bool echo = false;
};

int row_of(const agent::Classification& c) { return static_cast<int>(c.index()); }

Truth ground_truth(const WorldState& world, std::size_t receiver, const Scenario& scenario) {
    Truth truth;
    const auto& me = world.agents[receiver];
    std::vector<RobotId> reaching;
    for (const auto& t : world.transmissions) {
        if (t.emitter == me.id) {
            const auto d = channel::nearest_obstacle_ahead(t.pose, scenario.obstacles);
            truth.echo = d && 2.0 * *d <= scenario.channel.range;
            continue;
        }
        const auto from = t.pose.position;
        const auto to = me.pose.position;
        if (!channel::in_cone(t.pose, to, scenario.channel)) continue;
        if (!(from == to) && !channel::line_of_sight(from, to, scenario.obstacles)) continue;
        reaching.push_back(t.emitter);
    }
    if (reaching.size() == 1) {
        if (me.database.contains(reaching.front())) {
            truth.signal = agent::Familiar{reaching.front()};
        } else {
            truth.signal = agent::Unknown{};
        }
    } else if (reaching.size() > 1) {
        truth.signal = agent::Unknown{};
    }
    return truth;
}

void grade(const Truth& truth, const std::vector<agent::AgentEvent>& events, Metrics& m) {
    std::vector<agent::Classification> obstacle_verdicts;
    std::vector<agent::Classification> signal_verdicts;
    bool no_detection = false;
    for (const auto& ev : events) {
        const auto* c = std::get_if<agent::Classification>(&ev);
        if (!c) continue;
        if (std::holds_alternative<agent::Obstacle>(*c)) {
            obstacle_verdicts.push_back(*c);
        } else if (std::holds_alternative<agent::NoDetection>(*c)) {
            no_detection = true;
        } else {
            signal_verdicts.push_back(*c);
        }
    }

    if (no_detection) {
        bool expected_anything = false;
        if (truth.signal) {
            ++m.confusion[row_of(*truth.signal)][kNoDetectionRow];
            expected_anything = true;
        }
        if (truth.echo) {
            ++m.confusion[kObstacleRow][kNoDetectionRow];
            expected_anything = true;
        }
        if (!expected_anything) ++m.confusion[kNoDetectionRow][kNoDetectionRow];
        return;
    }

    if (obstacle_verdicts.empty()) {
        if (truth.echo) ++m.confusion[kObstacleRow][kNoDetectionRow];
    } else {
        for (std::size_t i = 0; i < obstacle_verdicts.size(); ++i) {
            const int row = (truth.echo && i == 0) ? kObstacleRow : kNoDetectionRow;
            ++m.confusion[row][kObstacleRow];
        }
    }

    if (signal_verdicts.empty()) {
        if (truth.signal) ++m.confusion[row_of(*truth.signal)][kNoDetectionRow];
    } else {
        for (std::size_t i = 0; i < signal_verdicts.size(); ++i) {
            const auto& v = signal_verdicts[i];
            if (!truth.signal || i > 0) {
                ++m.confusion[kNoDetectionRow][row_of(v)];
                continue;
            }
            ++m.confusion[row_of(*truth.signal)][row_of(v)];
            const auto* want = std::get_if<agent::Familiar>(&*truth.signal);
            const auto* got = std::get_if<agent::Familiar>(&v);
            if (want && got && want->peer != got->peer) ++m.wrong_peer;
        }
    }
}

std::vector<double> member_headings(const WorldState& world) {
    std::vector<double> out;
    for (std::size_t i = 0; i < world.agents.size(); ++i) {
        if (!world.intruder[i]) out.push_back(world.agents[i].pose.heading_deg);
    }
    return out;
}

}  // namespace

const char* to_string(Layout layout) noexcept {
    switch (layout) {
        case Layout::Grid: return "grid";
        case Layout::Random: return "random";
        case Layout::Explicit: return "explicit";
    }
    return "grid";
}

const char* to_string(EventKind kind) noexcept {
    switch (kind) {
        case EventKind::Transmit: return "transmit";
        case EventKind::Receive: return "receive";
        case EventKind::Classify: return "classify";
        case EventKind::HeadingUpdate: return "heading_update";
        case EventKind::Avoidance: return "avoidance";
        case EventKind::Move: return "move";
    }
    return "transmit";
}

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error(violations.empty() ? std::string("invalid scenario")
                                            : "invalid scenario: " + violations.front()),
      violations_(std::move(violations)) {}

std::vector<std::string> Scenario::violations() const {
    std::vector<std::string> out;
    if (!(width > 0.0) || !std::isfinite(width)) out.push_back(fmt::format("world width must be > 0 (got {})", width));
    if (!(height > 0.0) || !std::isfinite(height)) out.push_back(fmt::format("world height must be > 0 (got {})", height));
    for (auto& v : channel.violations()) out.push_back(std::move(v));

    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        const auto& o = obstacles[i];
        if (o.a == o.b) out.push_back(fmt::format("obstacle {} has coincident endpoints", i + 1));
        if (!(o.reflectivity > 0.0 && o.reflectivity <= 1.0))
            out.push_back(fmt::format("obstacle {} reflectivity must lie in (0, 1] (got {})", i + 1, o.reflectivity));
    }

    std::set<int> ids;
    if (layout != Layout::Explicit) {
        if (count < 0 || count > 254) out.push_back(fmt::format("agent count must lie in 0..254 (got {})", count));
        for (int id = 1; id <= std::clamp(count, 0, 254); ++id) ids.insert(id);
        if (!(heading_max_deg >= heading_min_deg && heading_max_deg - heading_min_deg <= 360.0))
            out.push_back("heading range must satisfy heading_min_deg <= heading_max_deg <= heading_min_deg + 360");
    }
    for (const auto& a : agents) {
        const int id = a.id.value();
        if (!a.intruder && layout != Layout::Explicit)
            out.push_back(fmt::format("agent {}: explicit agent rows need layout=explicit", id));
        if (!ids.insert(id).second) out.push_back(fmt::format("duplicate agent id {}", id));
        if (!inside_arena(*this, a.pose.position))
            out.push_back(fmt::format("agent {} at ({}, {}) is outside the {} x {} arena", id,
                                      a.pose.position.x, a.pose.position.y, width, height));
        if (!(a.pose.heading_deg >= 0.0 && a.pose.heading_deg < 360.0))
            out.push_back(fmt::format("agent {} heading must lie in [0, 360) (got {})", id, a.pose.heading_deg));
    }
    if (ids.empty()) out.push_back("scenario has no agents");

    if (n_slots && *n_slots < 1) out.push_back(fmt::format("n_slots must be >= 1 (got {})", *n_slots));
    if (!(alignment_epsilon_deg > 0.0)) out.push_back("alignment_epsilon_deg must be > 0");
    if (!(speed >= 0.0) || !std::isfinite(speed)) out.push_back("speed must be >= 0");
    if (!(d_avoid >= 0.0) || !std::isfinite(d_avoid)) out.push_back("d_avoid must be >= 0");
    if (steps < 0) out.push_back(fmt::format("steps must be >= 0 (got {})", steps));
    return out;
}

std::vector<AgentSpec> materialize_agents(const Scenario& scenario, std::uint64_t seed) {
    std::vector<AgentSpec> out;
    RandomStream rng = RandomStream(seed).derive({kLayoutStream});
    const int n = scenario.count;

    auto draw_heading = [&] {
        return geometry::normalize_deg(
            rng.uniform(scenario.heading_min_deg, scenario.heading_max_deg));
    };

    if (scenario.layout == Layout::Grid) {
        const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(std::max(n, 1)))));
        const int rows = (n + cols - 1) / cols;
        for (int i = 0; i < n; ++i) {
            const double x = (i % cols + 0.5) * scenario.width / cols;
            const double y = (i / cols + 0.5) * scenario.height / std::max(rows, 1);
            out.push_back({RobotId{i + 1}, Pose{{x, y}, draw_heading()}, false});
        }
    } else if (scenario.layout == Layout::Random) {
        for (int i = 0; i < n; ++i) {
            const double x = rng.uniform(0.0, scenario.width);
            const double y = rng.uniform(0.0, scenario.height);
            out.push_back({RobotId{i + 1}, Pose{{x, y}, draw_heading()}, false});
        }
    }
    for (const auto& a : scenario.agents) out.push_back(a);
    std::sort(out.begin(), out.end(), [](const AgentSpec& a, const AgentSpec& b) { return a.id < b.id; });
    return out;
}

int effective_slots(const Scenario& scenario, std::size_t agent_count) noexcept {
    if (scenario.n_slots) return *scenario.n_slots;
    return std::max<int>(1, static_cast<int>(agent_count));
}

WorldState make_world(const Scenario& scenario, std::uint64_t seed) {
    const auto specs = materialize_agents(scenario, seed);
    const int slots = effective_slots(scenario, specs.size());

    std::vector<RobotId> members;
    for (const auto& s : specs) {
        if (!s.intruder) members.push_back(s.id);
    }

    WorldState world;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& s = specs[i];
        const std::span<const RobotId> known =
            s.intruder ? std::span<const RobotId>{} : std::span<const RobotId>{members};
        world.agents.push_back(agent::make_agent(s.id, s.pose, known,
                                                 static_cast<int>(i) % slots, scenario.d_avoid));
        world.intruder.push_back(s.intruder);
    }
    return world;
}

WorldState step_world(const WorldState& world, const Scenario& scenario, const RandomStream& noise,
                      std::vector<TraceEvent>* trace, TickRecord* record, Execution execution) {
    const auto n = world.agents.size();
    const long tick = world.tick;

    std::vector<channel::Receiver> receivers;
    receivers.reserve(n);
    for (const auto& a : world.agents) receivers.push_back({a.id, a.pose});

    const RandomStream tick_noise = noise.derive({static_cast<std::uint64_t>(tick)});
    channel::Inboxes inboxes =
        execution == Execution::Parallel
            ? channel::propagate_parallel(world.transmissions, receivers, scenario.obstacles,
                                          scenario.channel, tick_noise)
            : channel::propagate(world.transmissions, receivers, scenario.obstacles,
                                 scenario.channel, tick_noise);

    const agent::StepContext ctx{effective_slots(scenario, n), scenario.channel,
                                 scenario.accept_broadcast_headings};

    // Phase A: every agent reads the same snapshot.
    std::vector<agent::AgentOutput> outputs(n);
    const auto count = static_cast<std::ptrdiff_t>(n);
    if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t i = 0; i < count; ++i) {
            const auto k = static_cast<std::size_t>(i);
            outputs[k] = agent::step_agent(world.agents[k], inboxes[k], tick, ctx);
        }
    } else {
        for (std::size_t k = 0; k < n; ++k) {
            outputs[k] = agent::step_agent(world.agents[k], inboxes[k], tick, ctx);
        }
    }

    WorldState next;
    next.tick = tick + 1;
    next.intruder = world.intruder;
    next.agents.reserve(n);

    for (std::size_t k = 0; k < n; ++k) {
        auto& out = outputs[k];
        // Phase B
        if (out.intent) {
            next.transmissions.push_back(
                {out.state.id, out.state.pose, codec::encode_frame(*out.intent), tick});
        }
        // Phase C
        std::optional<Pose> moved;
        if (scenario.motion) {
            out.state.pose = move_agent(out.state.pose, scenario.speed, scenario.width, scenario.height);
            moved = out.state.pose;
        }
        if (trace) append_trace(*trace, tick, world.agents[k], inboxes[k], out.events, out.intent, moved);
        next.agents.push_back(std::move(out.state));
    }

    if (record) {
        record->tick = tick;
        record->inboxes = std::move(inboxes);
        record->events.clear();
        record->intents.clear();
        for (auto& out : outputs) {
            record->events.push_back(std::move(out.events));
            record->intents.push_back(out.intent);
        }
    }
    return next;
}

double heading_spread(std::span<const double> headings_deg) {
    require(!headings_deg.empty(), "heading_spread needs at least one heading");
    const auto mean = agent::circular_mean(headings_deg);
    if (!mean) return 180.0;
    double worst = 0.0;
    for (double h : headings_deg) worst = std::max(worst, geometry::angular_distance_deg(h, *mean));
    return worst;
}

RunResult run(const Scenario& scenario, std::uint64_t seed, const RunOptions& options) {
    if (auto v = scenario.violations(); !v.empty()) throw ValidationError(std::move(v));

    RunResult result;
    Metrics& m = result.metrics;
    m.seed = seed;

    const RandomStream noise = RandomStream(seed).derive({kNoiseStream});
    WorldState world = make_world(scenario, seed);

    auto record_spread = [&](long at_tick) {
        const auto headings = member_headings(world);
        const double spread = headings.empty() ? 0.0 : heading_spread(headings);
        m.spread_history.push_back(spread);
        if (!m.time_to_alignment && spread < scenario.alignment_epsilon_deg) m.time_to_alignment = at_tick;
    };
    record_spread(0);

    TickRecord rec;
    for (long t = 0; t < scenario.steps; ++t) {
        std::vector<Truth> truths(world.agents.size());
        for (std::size_t k = 0; k < world.agents.size(); ++k) truths[k] = ground_truth(world, k, scenario);

        world = step_world(world, scenario, noise, options.record_trace ? &result.trace : nullptr, &rec,
                           options.execution);

        for (std::size_t k = 0; k < rec.inboxes.size(); ++k) {
            for (const auto& r : rec.inboxes[k]) {
                if (std::holds_alternative<channel::Echo>(r)) continue;
                ++m.total_receptions;
                if (std::holds_alternative<channel::Corrupted>(r)) ++m.collisions;
                const auto cw = std::visit([](const auto& x) { return x.codeword; }, r);
                if (std::holds_alternative<codec::DecodeFailure>(codec::decode_frame(cw))) ++m.decode_failures;
            }
            grade(truths[k], rec.events[k], m);
        }
        record_spread(t + 1);
    }

    m.message_loss_rate =
        static_cast<double>(m.decode_failures) / static_cast<double>(std::max<long>(m.total_receptions, 1));
    m.final_spread_deg = m.spread_history.back();
    long off_diagonal = 0;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            if (r != c) off_diagonal += m.confusion[r][c];
    m.misclassifications = off_diagonal + m.wrong_peer;
    return result;
}

}  // namespace irswarm::sim
