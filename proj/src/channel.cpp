#include "irswarm/channel.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "irswarm/error.hpp"

namespace irswarm::channel {

std::vector<std::string> ChannelParams::violations() const {
    std::vector<std::string> out;
    if (!(range > 0.0) || !std::isfinite(range)) out.push_back(fmt::format("range must be > 0 (got {})", range));
    if (!(cone_half_angle_deg > 0.0 && cone_half_angle_deg <= 180.0))
        out.push_back(fmt::format("cone_half_angle_deg must lie in (0, 180] (got {})", cone_half_angle_deg));
    if (!(base_intensity > 0.0) || !std::isfinite(base_intensity))
        out.push_back(fmt::format("base_intensity must be > 0 (got {})", base_intensity));
    if (!(min_distance > 0.0) || !std::isfinite(min_distance))
        out.push_back(fmt::format("min_distance must be > 0 (got {})", min_distance));
    if (!(bit_error_rate >= 0.0 && bit_error_rate < 1.0))
        out.push_back(fmt::format("bit_error_rate must lie in [0, 1) (got {})", bit_error_rate));
    if (!(assumed_reflectivity > 0.0 && assumed_reflectivity <= 1.0))
        out.push_back(fmt::format("reflectivity_default must lie in (0, 1] (got {})", assumed_reflectivity));
    return out;
}

bool in_cone(const Pose& emitter, Vec2 point, const ChannelParams& params) noexcept {
    const double d = geometry::distance(emitter.position, point);
    if (d > params.range) return false;
    if (d == 0.0) return true;
    const double bearing = geometry::bearing_deg(emitter.position, point);
    return geometry::angular_distance_deg(emitter.heading_deg, bearing) <= params.cone_half_angle_deg;
}

bool line_of_sight(Vec2 a, Vec2 b, std::span<const ObstacleSegment> obstacles) {
    require(!(a == b), "line_of_sight needs two distinct points");
    return std::none_of(obstacles.begin(), obstacles.end(), [&](const ObstacleSegment& o) {
        return geometry::open_segment_hits(a, b, o.a, o.b);
    });
}

double intensity_at(double distance, const ChannelParams& params) {
    require(distance >= 0.0, "distance must be non-negative");
    const double d = std::max(distance, params.min_distance);
    return params.base_intensity / (d * d);
}

std::optional<double> nearest_obstacle_ahead(const Pose& emitter,
                                             std::span<const ObstacleSegment> obstacles,
                                             const ObstacleSegment** hit) noexcept {
    const Vec2 dir = geometry::unit_from_deg(emitter.heading_deg);
    std::optional<double> best;
    for (const auto& o : obstacles) {
        const auto t = geometry::ray_segment_distance(emitter.position, dir, o.a, o.b);
        if (t && (!best || *t < *best)) {
            best = t;
            if (hit) *hit = &o;
        }
    }
    return best;
}

std::optional<Echo> echo_probe(const Pose& emitter, Codeword codeword,
                               std::span<const ObstacleSegment> obstacles,
                               const ChannelParams& params) noexcept {
    const ObstacleSegment* wall = nullptr;
    const auto d = nearest_obstacle_ahead(emitter, obstacles, &wall);
    if (!d || 2.0 * *d > params.range) return std::nullopt;
    const double path = std::max(2.0 * *d, params.min_distance);
    return Echo{codeword, wall->reflectivity * params.base_intensity / (path * path)};
}

double estimate_distance(double echo_intensity, double reflectivity, const ChannelParams& params) {
    require(echo_intensity > 0.0, "echo intensity must be positive");
    return std::sqrt(reflectivity * params.base_intensity / echo_intensity) / 2.0;
}

namespace detail {

void check_unique_emitters(std::span<const Transmission> transmissions) {
    std::set<RobotId> seen;
    for (const auto& t : transmissions) {
        if (!seen.insert(t.emitter).second) {
            throw ContractViolation(
                fmt::format("emitter {} transmits twice in one tick", t.emitter.value()));
        }
    }
}

std::vector<Reception> inbox_for(const Receiver& receiver,
                                 std::span<const Transmission> transmissions,
                                 std::span<const ObstacleSegment> obstacles,
                                 const ChannelParams& params, const RandomStream& noise) {
    std::vector<Reception> inbox;
    const Transmission* own = nullptr;
    int arrivals = 0;
    Codeword superposed;
    double total_intensity = 0.0;
    double strongest = -1.0;
    double strongest_bearing = 0.0;

    for (const auto& t : transmissions) {
        if (t.emitter == receiver.id) {
            own = &t;
            continue;
        }
        const Vec2 from = t.pose.position;
        const Vec2 to = receiver.pose.position;
        if (!in_cone(t.pose, to, params)) continue;
        if (!(from == to) && !line_of_sight(from, to, obstacles)) continue;

        const double intensity = intensity_at(geometry::distance(from, to), params);
        ++arrivals;
        superposed = superposed | t.codeword;
        total_intensity += intensity;
        if (intensity > strongest) {
            strongest = intensity;
            strongest_bearing = geometry::bearing_deg(to, from);
        }
    }

    if (arrivals == 1) {
        // Ambient light flips bits independently. 42 draws per clean reception
        // regardless of p, so the stream layout does not depend on p.
        RandomStream rng = noise.derive({receiver.id.value()});
        Codeword received = superposed;
        for (int i = 0; i < codec::kCodewordBits; ++i) {
            if (rng.uniform01() < params.bit_error_rate) received = received.with_bit_flipped(i);
        }
        inbox.emplace_back(Clean{received, total_intensity, strongest_bearing});
    } else if (arrivals > 1) {
        inbox.emplace_back(Corrupted{superposed, total_intensity, strongest_bearing});
    }

    if (own) {
        if (auto echo = echo_probe(own->pose, own->codeword, obstacles, params)) {
            inbox.emplace_back(*echo);
        }
    }
    return inbox;
}

}  // namespace detail

Inboxes propagate(std::span<const Transmission> transmissions, std::span<const Receiver> receivers,
                  std::span<const ObstacleSegment> obstacles, const ChannelParams& params,
                  const RandomStream& noise) {
    detail::check_unique_emitters(transmissions);
    Inboxes out;
    out.reserve(receivers.size());
    for (const auto& r : receivers) {
        out.push_back(detail::inbox_for(r, transmissions, obstacles, params, noise));
    }
    return out;
}

}  // namespace irswarm::channel
