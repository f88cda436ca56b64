#pragma once

// Optical model of the shared IR medium in a 2D arena.
//
// Emitters radiate into a cone around their heading; receivers are
// omnidirectional. Light from simultaneous emitters superposes (bitwise OR of
// codewords). A forward ray from each emitter may bounce off an obstacle and
// return the emitter's own code as an echo.

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "irswarm/codec.hpp"
#include "irswarm/geometry.hpp"
#include "irswarm/rng.hpp"

namespace irswarm::channel {

using codec::Codeword;
using codec::RobotId;
using geometry::Vec2;

struct Pose {
    Vec2 position;
    double heading_deg = 0.0;  ///< [0, 360), 0 = +x, counter-clockwise
    friend bool operator==(const Pose&, const Pose&) = default;
};

struct ObstacleSegment {
    Vec2 a;
    Vec2 b;
    double reflectivity = 0.5;  ///< (0, 1]
    friend bool operator==(const ObstacleSegment&, const ObstacleSegment&) = default;
};

struct ChannelParams {
    double range = 2.0;
    double cone_half_angle_deg = 60.0;
    double base_intensity = 1.0;
    double min_distance = 0.01;
    double bit_error_rate = 0.0;
    /// Reflectivity robots assume when turning an echo into a distance; also
    /// the default for obstacles that do not declare their own.
    double assumed_reflectivity = 0.5;

    /// Human-readable list of violated bounds; empty when valid.
    std::vector<std::string> violations() const;
    friend bool operator==(const ChannelParams&, const ChannelParams&) = default;
};

struct Transmission {
    RobotId emitter;
    Pose pose;
    Codeword codeword;
    long tick = 0;
};

struct Receiver {
    RobotId id;
    Pose pose;
};

struct Clean {
    Codeword codeword;
    double intensity = 0.0;
    double bearing_deg = 0.0;
    friend bool operator==(const Clean&, const Clean&) = default;
};

/// Two or more codes arrived together; `codeword` is their OR.
struct Corrupted {
    Codeword codeword;
    double intensity = 0.0;
    double bearing_deg = 0.0;  ///< bearing of the strongest contributor
    friend bool operator==(const Corrupted&, const Corrupted&) = default;
};

/// The receiver's own emission reflected back by an obstacle.
struct Echo {
    Codeword codeword;
    double intensity = 0.0;
    friend bool operator==(const Echo&, const Echo&) = default;
};

using Reception = std::variant<Clean, Corrupted, Echo>;

/// One inbox per receiver, in the order receivers were given.
using Inboxes = std::vector<std::vector<Reception>>;

bool in_cone(const Pose& emitter, Vec2 point, const ChannelParams& params) noexcept;

/// True iff the open segment (a, b) crosses no obstacle. Throws ContractViolation if a == b.
bool line_of_sight(Vec2 a, Vec2 b, std::span<const ObstacleSegment> obstacles);

/// I0 / max(distance, d_min)^2
double intensity_at(double distance, const ChannelParams& params);

/// Distance to the nearest obstacle straight ahead of `emitter`, if any.
std::optional<double> nearest_obstacle_ahead(const Pose& emitter,
                                             std::span<const ObstacleSegment> obstacles,
                                             const ObstacleSegment** hit = nullptr) noexcept;

/// Echo of `codeword` when the round trip 2d to the nearest obstacle ahead fits in range.
std::optional<Echo> echo_probe(const Pose& emitter, Codeword codeword,
                               std::span<const ObstacleSegment> obstacles,
                               const ChannelParams& params) noexcept;

/// sqrt(rho * I0 / intensity) / 2, the inverse of the echo intensity model.
double estimate_distance(double echo_intensity, double reflectivity, const ChannelParams& params);

/// Serial reference: delivers one tick of transmissions to every receiver.
///
/// Bit noise for receiver r is drawn from `noise.derive({r.id})`, so the result
/// does not depend on evaluation order. Throws ContractViolation if an emitter
/// appears twice.
Inboxes propagate(std::span<const Transmission> transmissions, std::span<const Receiver> receivers,
                  std::span<const ObstacleSegment> obstacles, const ChannelParams& params,
                  const RandomStream& noise);

/// OpenMP version of propagate(); must produce identical inboxes.
Inboxes propagate_parallel(std::span<const Transmission> transmissions,
                           std::span<const Receiver> receivers,
                           std::span<const ObstacleSegment> obstacles,
                           const ChannelParams& params, const RandomStream& noise);

namespace detail {
void check_unique_emitters(std::span<const Transmission> transmissions);
std::vector<Reception> inbox_for(const Receiver& receiver,
                                 std::span<const Transmission> transmissions,
                                 std::span<const ObstacleSegment> obstacles,
                                 const ChannelParams& params, const RandomStream& noise);
}  // namespace detail

}  // namespace irswarm::channel
