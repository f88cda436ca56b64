#include <cstddef>
#include <cstdint>

#include "irswarm/channel.hpp"

namespace irswarm::channel {

// Two passes. The first evaluates every (receiver, emitter) link independently,
// which is where the cone and line-of-sight cost lives. The second folds each
// receiver's row of links into its inbox.
Inboxes propagate_parallel(std::span<const Transmission> transmissions,
                           std::span<const Receiver> receivers,
                           std::span<const ObstacleSegment> obstacles,
                           const ChannelParams& params, const RandomStream& noise) {
    detail::check_unique_emitters(transmissions);

    const auto n_rx = static_cast<std::ptrdiff_t>(receivers.size());
    const auto n_tx = static_cast<std::ptrdiff_t>(transmissions.size());

    // intensity of each link, or 0 when the emitter does not reach the receiver
    std::vector<double> link(static_cast<std::size_t>(n_rx * n_tx), 0.0);

#pragma omp parallel for collapse(2) schedule(static)
    for (std::ptrdiff_t r = 0; r < n_rx; ++r) {
        for (std::ptrdiff_t t = 0; t < n_tx; ++t) {
            const auto& rx = receivers[static_cast<std::size_t>(r)];
            const auto& tx = transmissions[static_cast<std::size_t>(t)];
            if (tx.emitter == rx.id) continue;
            const Vec2 from = tx.pose.position;
            const Vec2 to = rx.pose.position;
            if (!in_cone(tx.pose, to, params)) continue;
            if (!(from == to)) {
                bool blocked = false;
                for (const auto& o : obstacles) {
                    if (geometry::open_segment_hits(from, to, o.a, o.b)) {
                        blocked = true;
                        break;
                    }
                }
                if (blocked) continue;
            }
            const double d = geometry::distance(from, to);
            const double clamped = d > params.min_distance ? d : params.min_distance;
            link[static_cast<std::size_t>(r * n_tx + t)] = params.base_intensity / (clamped * clamped);
        }
    }

    Inboxes out(receivers.size());

#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t r = 0; r < n_rx; ++r) {
        const auto& rx = receivers[static_cast<std::size_t>(r)];
        auto& inbox = out[static_cast<std::size_t>(r)];
        const double* row = link.data() + r * n_tx;

        int arrivals = 0;
        Codeword superposed;
        double total = 0.0;
        std::ptrdiff_t strongest = -1;
        const Transmission* own = nullptr;
        for (std::ptrdiff_t t = 0; t < n_tx; ++t) {
            const auto& tx = transmissions[static_cast<std::size_t>(t)];
            if (tx.emitter == rx.id) own = &tx;
            if (row[t] <= 0.0) continue;
            ++arrivals;
            superposed = superposed | tx.codeword;
            total += row[t];
            if (strongest < 0 || row[t] > row[strongest]) strongest = t;
        }

        if (arrivals > 0) {
            const auto& src = transmissions[static_cast<std::size_t>(strongest)];
            const double bearing = geometry::bearing_deg(rx.pose.position, src.pose.position);
            if (arrivals == 1) {
                RandomStream rng = noise.derive({rx.id.value()});
                std::uint64_t flips = 0;
                for (int i = 0; i < codec::kCodewordBits; ++i) {
                    if (rng.uniform01() < params.bit_error_rate) {
                        flips |= std::uint64_t{1} << (codec::kCodewordBits - 1 - i);
                    }
                }
                inbox.emplace_back(Clean{Codeword::from_raw(superposed.raw() ^ flips), total, bearing});
            } else {
                inbox.emplace_back(Corrupted{superposed, total, bearing});
            }
        }
        if (own) {
            if (auto echo = echo_probe(own->pose, own->codeword, obstacles, params)) {
                inbox.emplace_back(*echo);
            }
        }
    }
    return out;
}

}  // namespace irswarm::channel
