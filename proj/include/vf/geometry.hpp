#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace vf {

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// Wraps an angle into [-pi, pi).
inline double normalize_angle(double a) {
    double r = std::fmod(a + kPi, 2.0 * kPi);
    if (r < 0.0) r += 2.0 * kPi;
    return r - kPi;
}

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

    double norm() const { return std::hypot(x, y); }
    double squared_norm() const { return x * x + y * y; }
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
};

// Planar pose. Heading is measured CCW from the +x axis and kept in [-pi, pi).
struct Pose2D {
    Vec2 position;
    double heading = 0.0;

    Pose2D() = default;
    Pose2D(Vec2 p, double h) : position(p), heading(normalize_angle(h)) {}

    Vec2 forward() const { return {std::cos(heading), std::sin(heading)}; }
    // Unit vector 90 degrees clockwise from forward.
    Vec2 right() const { return {std::sin(heading), -std::cos(heading)}; }
};

using Polygon = std::vector<Vec2>;

// Even-odd test; points on an edge count as inside.
bool point_in_polygon(const Vec2& p, const Polygon& poly);

// True if p lies inside any polygon of the set.
bool point_in_any(const Vec2& p, const std::vector<Polygon>& polys);

// Distance from point p to segment [a, b].
double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

// Proper + touching segment intersection test.
bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

// Signed polygon area (positive for CCW winding).
double polygon_area(const Polygon& poly);

// Expands a polyline into a closed polygon of the given total width
// (miter joins; used to build road corridors for the preset scenarios).
Polygon thicken_polyline(const std::vector<Vec2>& centerline, double width);

}  // namespace vf
