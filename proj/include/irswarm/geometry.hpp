#pragma once

#include <optional>

namespace irswarm::geometry {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 v) noexcept { return {s * v.x, s * v.y}; }
    friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
double norm(Vec2 v) noexcept;
double distance(Vec2 a, Vec2 b) noexcept;

/// Wraps any finite angle into [0, 360).
double normalize_deg(double deg) noexcept;
/// Smallest absolute difference between two headings, in [0, 180].
double angular_distance_deg(double a, double b) noexcept;
/// Direction of `to` as seen from `from`, in [0, 360); 0 deg is +x, counter-clockwise.
double bearing_deg(Vec2 from, Vec2 to) noexcept;
Vec2 unit_from_deg(double deg) noexcept;

/// True iff the open segment (a, b) meets the closed segment [c, d].
/// Touching an endpoint of [c, d] counts as meeting.
bool open_segment_hits(Vec2 a, Vec2 b, Vec2 c, Vec2 d) noexcept;

/// Distance along the ray origin + t * dir (|dir| = 1, t > 0) to the closed
/// segment [c, d], or nothing when the ray misses.
std::optional<double> ray_segment_distance(Vec2 origin, Vec2 dir, Vec2 c, Vec2 d) noexcept;

}  // namespace irswarm::geometry
