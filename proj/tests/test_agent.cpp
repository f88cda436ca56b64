#include <doctest.h>

#include <cmath>
#include <vector>

#include "irswarm/agent.hpp"
#include "irswarm/error.hpp"
#include "irswarm/geometry.hpp"
#include "decision_tree.hpp"

using namespace irswarm;
using namespace irswarm::agent;

namespace {

AgentState agent_with(int id, std::vector<int> known, double heading = 0.0, int slot = 0) {
    std::vector<codec::RobotId> ids;
    for (int k : known) ids.push_back(codec::RobotId{k});
    return make_agent(codec::RobotId{id}, Pose{{0, 0}, heading}, ids, slot, 0.5);
}

channel::Clean clean_frame(const codec::Frame& f, double bearing = 0.0) {
    return {codec::encode_frame(f), 1.0, bearing};
}

double circ_diff(double a, double b) { return geometry::angular_distance_deg(a, b); }

}  // namespace

TEST_CASE("classify: the three reception branches") {
    const channel::ChannelParams params;  // I0 = 1, assumed rho = 0.5
    auto a = agent_with(1, {7});
    a.last_emitted = codec::encode_frame(codec::Beacon{a.id});

    const channel::Reception echo = channel::Echo{*a.last_emitted, 0.125};
    CHECK(classify(a, echo, params) == Classification{Obstacle{1.0}});

    const channel::Reception from7 = clean_frame(codec::Beacon{codec::RobotId{7}});
    CHECK(classify(a, from7, params) == Classification{Familiar{codec::RobotId{7}}});

    const channel::Reception from99 = clean_frame(codec::Beacon{codec::RobotId{99}});
    CHECK(classify(a, from99, params) == Classification{Unknown{}});

    const channel::Reception garbled = channel::Clean{a.last_emitted->with_bit_flipped(30), 1.0, 0.0};
    CHECK(classify(a, garbled, params) == Classification{Unknown{}});

    const channel::Reception foreign_echo = channel::Echo{codec::encode_frame(codec::Beacon{codec::RobotId{2}}), 0.1};
    CHECK_THROWS_AS(classify(a, foreign_echo, params), ContractViolation);
}

TEST_CASE("classify conforms to the transcribed decision tree on every case") {
    const channel::ChannelParams params;
    int cases = 0;
    for (const auto& c : decision_tree::all_cases()) {
        const auto got = c.empty_inbox
                             ? std::get<Classification>(step_agent(c.agent, {}, 1, StepContext{2, params, false}).events.at(0))
                             : classify(c.agent, c.reception, c.decoded, params);
        const auto want = decision_tree::expected(c);
        INFO("case " << c.name);
        CHECK(kind_name(got) == std::string(decision_tree::name(want)));
        if (const auto* f = std::get_if<Familiar>(&got)) CHECK(f->peer.value() == c.sender);
        ++cases;
    }
    CHECK(cases == decision_tree::kCaseCount);
}

TEST_CASE("circular_mean") {
    const std::vector<double> a{0.0, 90.0};
    CHECK(*circular_mean(a) == doctest::Approx(45.0));
    const std::vector<double> b{350.0, 10.0};
    CHECK(circ_diff(*circular_mean(b), 0.0) < 1e-9);
    const std::vector<double> c{0.0, 120.0, 240.0};
    CHECK_FALSE(circular_mean(c).has_value());
    const std::vector<double> d{10.0, 190.0};
    CHECK_FALSE(circular_mean(d).has_value());
    CHECK_THROWS_AS(circular_mean(std::vector<double>{}), ContractViolation);
}

TEST_CASE("circular_mean properties") {
    RandomStream rng(31);
    for (int trial = 0; trial < 2000; ++trial) {
        const int n = 1 + static_cast<int>(rng.next_u64() % 6);
        std::vector<double> angles;
        const double centre = rng.uniform(0, 360);
        for (int i = 0; i < n; ++i) angles.push_back(geometry::normalize_deg(centre + rng.uniform(-80, 80)));
        const auto mean = circular_mean(angles);
        REQUIRE(mean.has_value());
        REQUIRE(*mean >= 0.0);
        REQUIRE(*mean < 360.0);

        // Rotation equivariance.
        const double shift = rng.uniform(0, 360);
        std::vector<double> rotated;
        for (double x : angles) rotated.push_back(geometry::normalize_deg(x + shift));
        REQUIRE(circ_diff(*circular_mean(rotated), *mean + shift) < 1e-9);

        // Idempotence.
        const std::vector<double> same(static_cast<std::size_t>(n), angles[0]);
        REQUIRE(circ_diff(*circular_mean(same), angles[0]) < 1e-9);
    }
}

TEST_CASE("a single alignment step is contractive") {
    RandomStream rng(77);
    for (int trial = 0; trial < 5000; ++trial) {
        const double own = rng.uniform(0, 360);
        const double other = geometry::normalize_deg(own + rng.uniform(-179.9, 179.9));
        const double sep = circ_diff(own, other);
        if (sep < 1e-6) continue;
        const std::vector<double> pair{own, other};
        const double mid = *circular_mean(pair);
        // Strictly inside the minor arc.
        REQUIRE(circ_diff(mid, own) < sep);
        REQUIRE(circ_diff(mid, other) < sep);
        REQUIRE(std::fabs(circ_diff(mid, own) + circ_diff(mid, other) - sep) < 1e-9);
    }
}

TEST_CASE("may_transmit") {
    auto a = agent_with(1, {}, 0.0, 2);
    CHECK(may_transmit(a, 7, 5));
    a.slot_index = 3;
    CHECK_FALSE(may_transmit(a, 7, 5));
    a.slot_index = 0;
    for (long t = 0; t < 20; ++t) CHECK(may_transmit(a, t, 1));
    CHECK_THROWS_AS(may_transmit(a, 1, 0), ContractViolation);
    a.slot_index = 5;
    CHECK_THROWS_AS(may_transmit(a, 1, 5), ContractViolation);
}

TEST_CASE("next_frame alternates beacon and round-robin headings") {
    auto a = agent_with(1, {3, 5}, 90.0);
    CHECK(next_frame(a) == codec::Frame{codec::Beacon{a.id}});

    a.neighbors[codec::RobotId{3}] = {codec::RobotId{3}, 10.0, 0};
    a.neighbors[codec::RobotId{5}] = {codec::RobotId{5}, 20.0, 0};
    const StepContext ctx{1, {}, false};
    std::vector<codec::Frame> sent;
    for (long t = 0; t < 6; ++t) {
        auto out = step_agent(a, {}, t, ctx);
        REQUIRE(out.intent.has_value());
        sent.push_back(*out.intent);
        a = out.state;
    }
    const codec::Frame beacon = codec::Beacon{a.id};
    CHECK(sent[0] == beacon);
    CHECK(sent[1] == codec::Frame{codec::Heading{a.id, 3, 64}});
    CHECK(sent[2] == beacon);
    CHECK(sent[3] == codec::Frame{codec::Heading{a.id, 5, 64}});
    CHECK(sent[4] == beacon);
    CHECK(sent[5] == codec::Frame{codec::Heading{a.id, 3, 64}});
}

TEST_CASE("step_agent: heading message addressed to self averages") {
    auto a = agent_with(1, {2}, 0.0, 1);
    const StepContext ctx{5, {}, false};
    const std::vector<channel::Reception> inbox{clean_frame(codec::Heading{codec::RobotId{2}, 1, 64})};
    const auto out = step_agent(a, inbox, 0, ctx);
    CHECK(out.state.pose.heading_deg == doctest::Approx(45.0));
    REQUIRE(out.events.size() == 2);
    CHECK(out.events[0] == AgentEvent{Classification{Familiar{codec::RobotId{2}}}});
    CHECK(out.events[1] == AgentEvent{HeadingUpdated{0.0, out.state.pose.heading_deg}});
    CHECK_FALSE(out.intent.has_value());
}

TEST_CASE("step_agent: headings addressed elsewhere, or from strangers, are ignored") {
    auto a = agent_with(1, {2}, 0.0);
    const StepContext ctx{5, {}, false};
    const std::vector<channel::Reception> other{clean_frame(codec::Heading{codec::RobotId{2}, 3, 64})};
    CHECK(step_agent(a, other, 1, ctx).state.pose.heading_deg == 0.0);
    const std::vector<channel::Reception> stranger{clean_frame(codec::Heading{codec::RobotId{9}, 1, 64})};
    CHECK(step_agent(a, stranger, 1, ctx).state.pose.heading_deg == 0.0);

    const std::vector<channel::Reception> broadcast{clean_frame(codec::Heading{codec::RobotId{2}, 0xFF, 64})};
    CHECK(step_agent(a, broadcast, 1, ctx).state.pose.heading_deg == 0.0);
    const StepContext open{5, {}, true};
    CHECK(step_agent(a, broadcast, 1, open).state.pose.heading_deg == doctest::Approx(45.0));
}

TEST_CASE("step_agent: empty inbox outside own slot") {
    const auto a = agent_with(1, {2}, 33.0, 4);
    const auto out = step_agent(a, {}, 0, StepContext{5, {}, false});
    REQUIRE(out.events.size() == 1);
    CHECK(out.events[0] == AgentEvent{Classification{NoDetection{}}});
    CHECK_FALSE(out.intent.has_value());
    CHECK(out.state == a);
}

TEST_CASE("step_agent: close echo triggers a 90 degree turn") {
    auto a = agent_with(1, {}, 300.0);
    a.last_emitted = codec::encode_frame(codec::Beacon{a.id});
    const channel::ChannelParams params;
    // Intensity for an estimated distance of 0.2 m: 0.5 / (0.4)^2.
    const std::vector<channel::Reception> inbox{channel::Echo{*a.last_emitted, 0.5 / (0.4 * 0.4)}};
    const auto out = step_agent(a, inbox, 1, StepContext{5, params, false});
    CHECK(out.state.pose.heading_deg == doctest::Approx(30.0));
    REQUIRE(out.events.size() == 2);
    const auto& verdict = std::get<Obstacle>(std::get<Classification>(out.events[0]));
    CHECK(verdict.estimated_distance == doctest::Approx(0.2));
    CHECK(std::holds_alternative<AvoidanceTurn>(out.events[1]));

    // Far echo: no turn.
    const std::vector<channel::Reception> far{channel::Echo{*a.last_emitted, 0.5 / (1.6 * 1.6)}};
    CHECK(step_agent(a, far, 1, StepContext{5, params, false}).state.pose.heading_deg == 300.0);
}

TEST_CASE("step_agent: beacons fill the neighbor table with their bearing") {
    auto a = agent_with(1, {2, 3});
    const std::vector<channel::Reception> inbox{clean_frame(codec::Beacon{codec::RobotId{2}}, 135.0)};
    const auto out = step_agent(a, inbox, 12, StepContext{5, {}, false});
    REQUIRE(out.state.neighbors.size() == 1);
    const auto& e = out.state.neighbors.at(codec::RobotId{2});
    CHECK(e.bearing_deg == 135.0);
    CHECK(e.last_seen == 12);

    // Strangers never enter the table.
    const std::vector<channel::Reception> stranger{clean_frame(codec::Beacon{codec::RobotId{8}}, 10.0)};
    CHECK(step_agent(a, stranger, 12, StepContext{5, {}, false}).state.neighbors.empty());
}

TEST_CASE("step_agent is a pure function and keeps its invariants") {
    RandomStream rng(123);
    const channel::ChannelParams params;
    for (int trial = 0; trial < 300; ++trial) {
        auto a = agent_with(1 + static_cast<int>(rng.next_u64() % 5), {1, 2, 3, 4, 5}, rng.uniform(0, 360),
                            static_cast<int>(rng.next_u64() % 3));
        a.last_emitted = codec::encode_frame(codec::Beacon{a.id});
        for (long t = 0; t < 20; ++t) {
            std::vector<channel::Reception> inbox;
            const int n = static_cast<int>(rng.next_u64() % 3);
            for (int i = 0; i < n; ++i) {
                const codec::RobotId who{static_cast<int>(rng.next_u64() % 10)};
                if (rng.next_u64() % 2) {
                    inbox.push_back(clean_frame(codec::Beacon{who}, rng.uniform(0, 360)));
                } else {
                    inbox.push_back(clean_frame(
                        codec::Heading{who, a.id.value(), static_cast<std::uint8_t>(rng.next_u64() % 256)}));
                }
            }
            if (a.last_emitted && rng.next_u64() % 4 == 0) inbox.push_back(channel::Echo{*a.last_emitted, rng.uniform(0.1, 10)});

            const StepContext ctx{3, params, false};
            const auto first = step_agent(a, inbox, t, ctx);
            const auto second = step_agent(a, inbox, t, ctx);
            REQUIRE(first == second);
            for (const auto& [id, entry] : first.state.neighbors) {
                REQUIRE(first.state.database.contains(id));
                REQUIRE(entry.peer == id);
            }
            REQUIRE(first.state.database.contains(first.state.id));
            REQUIRE(first.intent.has_value() == may_transmit(a, t, 3));
            a = first.state;
        }
    }
}

TEST_CASE("distinct slots never overlap") {
    for (int n_slots = 1; n_slots <= 8; ++n_slots) {
        std::vector<AgentState> agents;
        for (int s = 0; s < n_slots; ++s) agents.push_back(agent_with(s, {}, 0.0, s));
        for (long t = 0; t < 100; ++t) {
            int talkers = 0;
            for (const auto& a : agents) talkers += step_agent(a, {}, t, StepContext{n_slots, {}, false}).intent ? 1 : 0;
            REQUIRE(talkers == 1);
        }
    }
}
