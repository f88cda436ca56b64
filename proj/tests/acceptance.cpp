// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>
#include <unistd.h>

#include "decision_tree.hpp"
#include "irswarm/agent.hpp"
#include "irswarm/channel.hpp"
#include "irswarm/codec.hpp"
#include "irswarm/sim.hpp"
#include "oracles.hpp"

using namespace irswarm;

namespace {

struct Outcome {
    bool ok;
    std::string detail;
};

// Convergence tick per seed (1..20) for the alignment scenario below.
constexpr std::array<long, 20> kAlignmentTicks{238, 313, 172, 172, 312, 312, 292, 313, 254, 312,
                                                313, 312, 313, 313, 172, 279, 313, 172, 312, 152};

Outcome decision_tree_conformance() {
    const channel::ChannelParams params;
    const auto cases = decision_tree::all_cases();
    int mismatches = 0;
    for (const auto& c : cases) {
        const auto got = c.empty_inbox
                             ? std::get<agent::Classification>(
                                   agent::step_agent(c.agent, {}, 1, agent::StepContext{2, params, false}).events.at(0))
                             : agent::classify(c.agent, c.reception, c.decoded, params);
        if (agent::kind_name(got) != std::string(decision_tree::name(decision_tree::expected(c)))) {
            ++mismatches;
            fmt::print("  mismatch: {}\n", c.name);
        }
    }
    return {mismatches == 0 && cases.size() == decision_tree::kCaseCount && cases.size() <= 20,
            fmt::format("{} cases, {} mismatches", cases.size(), mismatches)};
}

Outcome codec_soundness() {
    RandomStream rng(2);
    int roundtrip_failures = 0;
    long accepted_flips = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto frame = oracle::random_frame(rng);
        const auto cw = codec::encode_frame(frame);
        const auto back = codec::decode_frame(cw);
        if (!std::holds_alternative<codec::Frame>(back) || std::get<codec::Frame>(back) != frame) ++roundtrip_failures;
        for (int bit = 8; bit < 42; ++bit) {
            if (std::holds_alternative<codec::Frame>(codec::decode_frame(cw.with_bit_flipped(bit)))) ++accepted_flips;
        }
    }
    return {roundtrip_failures == 0 && accepted_flips == 0,
            fmt::format("10000 frames, {} roundtrip failures, {} accepted flips", roundtrip_failures, accepted_flips)};
}

sim::Scenario huddle(int slots) {
    sim::Scenario s;
    s.width = 0.2;
    s.height = 0.2;
    s.layout = sim::Layout::Grid;
    s.count = 5;
    s.channel.cone_half_angle_deg = 180;
    s.channel.bit_error_rate = 0;
    s.n_slots = slots;
    s.steps = 1000;
    return s;
}

Outcome collisions() {
    const auto shared = sim::run(huddle(1), 1, {false, sim::Execution::Parallel}).metrics;
    const auto slotted = sim::run(huddle(5), 1, {false, sim::Execution::Parallel}).metrics;
    const bool ok = shared.message_loss_rate > 0.5 && shared.collisions > 0 && slotted.collisions == 0 &&
                    slotted.message_loss_rate == 0.0;
    return {ok, fmt::format("n_slots=1: loss {:.4f}, collisions {}; n_slots=5: loss {}, collisions {}",
                            shared.message_loss_rate, shared.collisions, slotted.message_loss_rate,
                            slotted.collisions)};
}

sim::Scenario flock() {
    sim::Scenario s;
    s.width = 1;
    s.height = 1;
    s.layout = sim::Layout::Random;
    s.count = 10;
    s.heading_min_deg = 0;
    s.heading_max_deg = 90;
    s.channel.cone_half_angle_deg = 180;
    s.channel.range = 2;
    s.channel.bit_error_rate = 0;
    s.n_slots.reset();
    s.alignment_epsilon_deg = 3;
    s.steps = 500;
    return s;
}

Outcome alignment() {
    const auto s = flock();
    std::vector<long> ticks;
    int unconverged = 0;
    int rises = 0;
    double worst_rise = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto m = sim::run(s, seed, {false, sim::Execution::Parallel}).metrics;
        ticks.push_back(m.time_to_alignment.value_or(-1));
        if (!m.time_to_alignment || *m.time_to_alignment > 500) ++unconverged;
        for (std::size_t t = 50; t < m.spread_history.size(); t += 50) {
            const double rise = m.spread_history[t] - m.spread_history[t - 50];
            if (rise > 0.0) {
                ++rises;
                worst_rise = std::max(worst_rise, rise);
            }
        }
    }
    std::string list;
    for (auto t : ticks) list += fmt::format("{}{}", list.empty() ? "" : " ", t);
    int drift = 0;
    for (std::size_t i = 0; i < ticks.size(); ++i) drift += ticks[i] != kAlignmentTicks[i];
    return {unconverged == 0 && rises == 0 && drift == 0,
            fmt::format("ticks [{}], unconverged {}, off-reference {}, sampled rises {} (largest {:.3f} deg)", list,
                        unconverged, drift, rises, worst_rise)};
}

Outcome distance_estimation() {
    channel::ChannelParams p;
    p.range = 4.0;
    p.bit_error_rate = 0;
    RandomStream rng(5);
    int checked = 0;
    double worst = 0.0;
    while (checked < 100) {
        const channel::Pose e{{rng.uniform(-1, 1), rng.uniform(-1, 1)}, rng.uniform(0, 360)};
        const channel::ObstacleSegment w{{rng.uniform(-3, 3), rng.uniform(-3, 3)},
                                         {rng.uniform(-3, 3), rng.uniform(-3, 3)},
                                         rng.uniform(0.1, 1.0)};
        const auto truth = oracle::ray_hit(e.position.x, e.position.y, e.heading_deg, w.a.x, w.a.y, w.b.x, w.b.y);
        if (!truth || 2 * *truth <= p.min_distance || 2 * *truth > p.range) continue;
        const auto echo = channel::echo_probe(e, {}, std::vector{w}, p);
        if (!echo) return {false, fmt::format("no echo for a wall at {}", *truth)};
        worst = std::max(worst, std::fabs(channel::estimate_distance(echo->intensity, w.reflectivity, p) - *truth));
        ++checked;
    }
    return {worst <= 1e-9, fmt::format("100 geometries, max error {:.3g}", worst)};
}

Outcome light_sensitivity() {
    sim::Scenario s;
    s.width = 2;
    s.height = 2;
    s.layout = sim::Layout::Grid;
    s.count = 9;
    s.channel.cone_half_angle_deg = 180;
    s.channel.range = 3;
    s.n_slots.reset();
    s.steps = 1000;
    std::vector<double> loss;
    for (double p : {0.0, 1e-3, 1e-2}) {
        s.channel.bit_error_rate = p;
        loss.push_back(sim::run(s, 11, {false, sim::Execution::Parallel}).metrics.message_loss_rate);
    }
    return {loss[0] == 0.0 && loss[0] <= loss[1] && loss[1] <= loss[2],
            fmt::format("loss at p=0, 1e-3, 1e-2: {}, {:.5f}, {:.5f}", loss[0], loss[1], loss[2])};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / fmt::format("irswarm_acceptance_{}", ::getpid());
    fs::create_directories(dir);
    std::ofstream(dir / "s.cfg") << "[world]\nwidth=3 height=3\nobstacle=1,1,2,1\n"
                                    "[channel]\nbit_error_rate=0.01\n"
                                    "[agents]\ncount=8 layout=random motion=on\nintruder=90,2.5,2.5,200\n"
                                    "[run]\nsteps=300\n";
    for (int i = 0; i < 2; ++i) {
        const auto cmd = fmt::format("\"{}\" run --scenario \"{}\" --seed 17 --trace \"{}\" --metrics \"{}\"",
                                     IRSWARM_CLI_PATH, (dir / "s.cfg").string(),
                                     (dir / fmt::format("t{}.csv", i)).string(),
                                     (dir / fmt::format("m{}.csv", i)).string());
        // Silence the CLI summary line.
        const auto quiet = cmd + " > /dev/null";
        if (std::system(quiet.c_str()) != 0) {
            fs::remove_all(dir);
            return {false, "cli run failed"};
        }
    }
    const auto t0 = slurp(dir / "t0.csv");
    const auto m0 = slurp(dir / "m0.csv");
    const bool same = t0 == slurp(dir / "t1.csv") && m0 == slurp(dir / "m1.csv");
    fs::remove_all(dir);
    return {same && !t0.empty() && !m0.empty(),
            fmt::format("trace {} bytes, metrics {} bytes, {}", t0.size(), m0.size(), same ? "identical" : "differ")};
}

Outcome ground_truth() {
    sim::Scenario s;
    s.width = 3;
    s.height = 3;
    s.layout = sim::Layout::Random;
    s.count = 8;
    s.motion = true;
    s.speed = 0.04;
    s.channel.cone_half_angle_deg = 75;
    s.channel.bit_error_rate = 0;
    s.n_slots.reset();
    s.obstacles = {{{1, 1}, {2, 1}, 0.5}, {{0.5, 2.5}, {2.5, 2.0}, 0.8}};
    s.agents = {{codec::RobotId{100}, {{0.3, 0.3}, 45}, true}, {codec::RobotId{101}, {{2.7, 2.7}, 225}, true}};
    s.steps = 1000;
    long off_diagonal = 0;
    std::array<long, 4> diagonal{};
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto m = sim::run(s, seed, {false, sim::Execution::Parallel}).metrics;
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) (i == j ? diagonal[i] : off_diagonal) += m.confusion[i][j];
        }
        off_diagonal += m.wrong_peer;
    }
    const bool every_kind = diagonal[0] > 0 && diagonal[1] > 0 && diagonal[2] > 0 && diagonal[3] > 0;
    return {off_diagonal == 0 && every_kind,
            fmt::format("diagonal obstacle/familiar/unknown/none = {}/{}/{}/{}, off-diagonal {}", diagonal[0],
                        diagonal[1], diagonal[2], diagonal[3], off_diagonal)};
}

}  // namespace

int main(int argc, char** argv) {
    struct Criterion {
        const char* name;
        double budget_s;
        std::function<Outcome()> check;
    };
    const std::vector<Criterion> criteria{
        {"decision-tree conformance", 1, decision_tree_conformance},
        {"codec soundness", 5, codec_soundness},
        {"collisions vs slotting", 2, collisions},
        {"heading alignment", 10, alignment},
        {"echo distance estimation", 1, distance_estimation},
        {"light-sensitivity monotonicity", 5, light_sensitivity},
        {"determinism", 2, determinism},
        {"ground-truth classification", 5, ground_truth},
    };
    // Optional argument: run only criterion N.
    std::size_t first = 0, last = criteria.size();
    if (argc > 1) {
        first = std::strtoul(argv[1], nullptr, 10) - 1;
        if (first >= criteria.size()) {
            fmt::print(stderr, "usage: acceptance [1..{}]\n", criteria.size());
            return 2;
        }
        last = first + 1;
    }
    int failed = 0;
    for (std::size_t i = first; i < last; ++i) {
        const auto& c = criteria[i];
        const auto start = std::chrono::steady_clock::now();
        Outcome r{false, "exception"};
        try {
            r = c.check();
        } catch (const std::exception& e) {
            r.detail = e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool ok = r.ok && secs < c.budget_s;
        failed += !ok;
        fmt::print("{} {}. {}: {} [{:.2f}s / {}s]\n", ok ? "PASS" : "FAIL", i + 1, c.name, r.detail, secs,
                   c.budget_s);
    }
    if (last - first > 1) fmt::print("{} of {} criteria passed\n", last - first - failed, last - first);
    return failed == 0 ? 0 : 1;
}
