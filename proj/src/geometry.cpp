#include "irswarm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace irswarm::geometry {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kDegToRad = std::numbers::pi / 180.0;

int orientation(Vec2 a, Vec2 b, Vec2 c) noexcept {
    const double v = cross(b - a, c - a);
    return (v > 0.0) - (v < 0.0);
}

// p is known to be collinear with [a, b].
bool within_box(Vec2 a, Vec2 b, Vec2 p) noexcept {
    return p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) &&
           p.y >= std::min(a.y, b.y) && p.y <= std::max(a.y, b.y);
}

}  // namespace

double norm(Vec2 v) noexcept { return std::hypot(v.x, v.y); }

double distance(Vec2 a, Vec2 b) noexcept { return norm(b - a); }

double normalize_deg(double deg) noexcept {
    double r = std::fmod(deg, 360.0);
    if (r < 0.0) r += 360.0;
    // fmod of a tiny negative can round up to exactly 360.
    if (r >= 360.0) r -= 360.0;
    return r;
}

double angular_distance_deg(double a, double b) noexcept {
    const double d = normalize_deg(a - b);
    return d > 180.0 ? 360.0 - d : d;
}

double bearing_deg(Vec2 from, Vec2 to) noexcept {
    return normalize_deg(std::atan2(to.y - from.y, to.x - from.x) * kRadToDeg);
}

Vec2 unit_from_deg(double deg) noexcept {
    const double r = deg * kDegToRad;
    return {std::cos(r), std::sin(r)};
}

bool open_segment_hits(Vec2 a, Vec2 b, Vec2 c, Vec2 d) noexcept {
    // Canonical endpoint order keeps the rounded orientation signs, and so the
    // answer, independent of direction.
    if (b.x < a.x || (b.x == a.x && b.y < a.y)) std::swap(a, b);
    if (d.x < c.x || (d.x == c.x && d.y < c.y)) std::swap(c, d);
    const int o1 = orientation(a, b, c);
    const int o2 = orientation(a, b, d);
    const int o3 = orientation(c, d, a);
    const int o4 = orientation(c, d, b);

    if (o1 != o2 && o3 != o4) {
        // Proper crossing, or [c, d] touching the line of (a, b) at c or d.
        // Exclude contacts at a or b themselves: the sight line is open.
        if (o3 == 0 || o4 == 0) {
            return false;
        }
        return true;
    }
    // Collinear overlap.
    if (o1 == 0 && o2 == 0) {
        const Vec2 dir = b - a;
        const double len2 = dot(dir, dir);
        double t0 = dot(c - a, dir) / len2;
        double t1 = dot(d - a, dir) / len2;
        if (t0 > t1) std::swap(t0, t1);
        return t1 > 0.0 && t0 < 1.0;
    }
    // An endpoint of [c, d] lying on the open segment.
    if (o1 == 0 && within_box(a, b, c) && c != a && c != b) return true;
    if (o2 == 0 && within_box(a, b, d) && d != a && d != b) return true;
    return false;
}

std::optional<double> ray_segment_distance(Vec2 origin, Vec2 dir, Vec2 c, Vec2 d) noexcept {
    const Vec2 seg = d - c;
    const double denom = cross(dir, seg);
    const Vec2 oc = c - origin;
    if (denom == 0.0) {
        // Parallel. A collinear wall is hit at its nearer endpoint ahead of us.
        if (cross(oc, dir) != 0.0) return std::nullopt;
        const double t0 = dot(c - origin, dir);
        const double t1 = dot(d - origin, dir);
        const double lo = std::min(t0, t1);
        const double hi = std::max(t0, t1);
        if (hi <= 0.0) return std::nullopt;
        return lo > 0.0 ? lo : std::optional<double>{};
    }
    const double t = cross(oc, seg) / denom;
    const double u = cross(oc, dir) / denom;
    if (t <= 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
    return t;
}

}  // namespace irswarm::geometry
