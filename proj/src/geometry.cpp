#include "vf/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace vf {

bool point_in_polygon(const Vec2& p, const Polygon& poly) {
    const size_t n = poly.size();
    if (n < 3) return false;
    // Edge-inclusive: report inside if p sits on any boundary segment.
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        if (point_segment_distance(p, poly[j], poly[i]) < 1e-12) return true;
    }
    bool inside = false;
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            double x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

bool point_in_any(const Vec2& p, const std::vector<Polygon>& polys) {
    for (const auto& poly : polys) {
        if (point_in_polygon(p, poly)) return true;
    }
    return false;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squared_norm();
    if (len2 == 0.0) return distance(p, a);
    double t = dot(p - a, ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return distance(p, a + ab * t);
}

namespace {

int orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
    double v = cross(b - a, c - a);
    if (v > 1e-12) return 1;
    if (v < -1e-12) return -1;
    return 0;
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
    return std::min(a.x, b.x) - 1e-12 <= p.x && p.x <= std::max(a.x, b.x) + 1e-12 &&
           std::min(a.y, b.y) - 1e-12 <= p.y && p.y <= std::max(a.y, b.y) + 1e-12;
}

}  // namespace

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    int o1 = orientation(a, b, c);
    int o2 = orientation(a, b, d);
    int o3 = orientation(c, d, a);
    int o4 = orientation(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

double polygon_area(const Polygon& poly) {
    double area = 0.0;
    const size_t n = poly.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        area += cross(poly[j], poly[i]);
    }
    return area / 2.0;
}

Polygon thicken_polyline(const std::vector<Vec2>& centerline, double width) {
    if (centerline.size() < 2) throw std::invalid_argument("thicken_polyline: need >= 2 points");
    const double h = width / 2.0;
    const size_t n = centerline.size();

    auto offset_at = [&](size_t i, double side) {
        // Miter join: average of adjacent segment normals, rescaled.
        Vec2 dir_prev, dir_next;
        if (i > 0) {
            Vec2 d = centerline[i] - centerline[i - 1];
            dir_prev = d / d.norm();
        }
        if (i + 1 < n) {
            Vec2 d = centerline[i + 1] - centerline[i];
            dir_next = d / d.norm();
        }
        if (i == 0) dir_prev = dir_next;
        if (i + 1 == n) dir_next = dir_prev;
        Vec2 avg = (dir_prev + dir_next) * 0.5;
        double len = avg.norm();
        if (len < 1e-9) avg = dir_prev; else avg = avg / len;
        Vec2 normal{-avg.y, avg.x};
        // Rescale so the perpendicular distance to both segments stays h.
        double scale = h / std::max(0.1, dot(normal, Vec2{-dir_prev.y, dir_prev.x}));
        return centerline[i] + normal * (side * scale);
    };

    Polygon poly;
    poly.reserve(2 * n);
    for (size_t i = 0; i < n; ++i) poly.push_back(offset_at(i, 1.0));
    for (size_t i = n; i-- > 0;) poly.push_back(offset_at(i, -1.0));
    return poly;
}

}  // namespace vf
