// Serial reference vs OpenMP kernels: channel propagation and whole-world ticks.
//
//   bench_propagate [agents] [obstacles] [reps]

#include <chrono>
#include <cstdlib>
#include <iostream>

#include <fmt/format.h>
#include <omp.h>

#include "irswarm/channel.hpp"
#include "irswarm/sim.hpp"

using namespace irswarm;

namespace {

template <typename F>
double time_ms(int reps, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) f();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
    const int n_agents = argc > 1 ? std::atoi(argv[1]) : 200;
    const int n_obstacles = argc > 2 ? std::atoi(argv[2]) : 50;
    const int reps = argc > 3 ? std::atoi(argv[3]) : 20;

    RandomStream rng(7);
    const double side = 20.0;
    channel::ChannelParams params;
    params.range = 6.0;
    params.cone_half_angle_deg = 90.0;
    params.bit_error_rate = 1e-3;

    std::vector<channel::ObstacleSegment> obstacles;
    for (int i = 0; i < n_obstacles; ++i) {
        const geometry::Vec2 a{rng.uniform(0, side), rng.uniform(0, side)};
        const auto d = geometry::unit_from_deg(rng.uniform(0, 360));
        obstacles.push_back({a, a + rng.uniform(0.2, 1.5) * d, 0.5});
    }
    std::vector<channel::Transmission> tx;
    std::vector<channel::Receiver> rx;
    for (int i = 0; i < n_agents; ++i) {
        const channel::Pose pose{{rng.uniform(0, side), rng.uniform(0, side)}, rng.uniform(0, 360)};
        const codec::RobotId id{i % 255};
        rx.push_back({id, pose});
        if (i % 3 == 0) tx.push_back({id, pose, codec::encode_frame(codec::Beacon{id}), 0});
    }
    const RandomStream noise(11);

    const double serial = time_ms(reps, [&] { (void)channel::propagate(tx, rx, obstacles, params, noise); });
    const double parallel =
        time_ms(reps, [&] { (void)channel::propagate_parallel(tx, rx, obstacles, params, noise); });
    const bool same = channel::propagate(tx, rx, obstacles, params, noise) ==
                      channel::propagate_parallel(tx, rx, obstacles, params, noise);

    fmt::print("threads={} agents={} transmitters={} obstacles={}\n", omp_get_max_threads(), rx.size(),
               tx.size(), obstacles.size());
    fmt::print("propagate  serial {:9.3f} ms  parallel {:9.3f} ms  speedup {:5.2f}x  identical={}\n", serial,
               parallel, serial / parallel, same);

    sim::Scenario s;
    s.width = s.height = side;
    s.layout = sim::Layout::Random;
    s.count = std::min(n_agents, 254);
    s.obstacles = obstacles;
    s.channel = params;
    s.n_slots = 3;
    s.motion = true;
    s.steps = 50;
    const double world_serial =
        time_ms(1, [&] { (void)sim::run(s, 1, {false, sim::Execution::Serial}); });
    const double world_parallel =
        time_ms(1, [&] { (void)sim::run(s, 1, {false, sim::Execution::Parallel}); });
    fmt::print("run({} ticks) serial {:9.3f} ms  parallel {:9.3f} ms  speedup {:5.2f}x\n", s.steps,
               world_serial, world_parallel, world_serial / world_parallel);
    return same ? EXIT_SUCCESS : EXIT_FAILURE;
}
