#include "vf/camera.hpp"

#include <algorithm>
#include <limits>

namespace vf {

namespace {

struct Frame {
    Vec3 origin;
    Vec3 right;
    Vec3 down;
    Vec3 forward;
};

Frame camera_frame(const CameraModel& cam, const Pose2D& pose) {
    const double ch = std::cos(pose.heading), sh = std::sin(pose.heading);
    const double cp = std::cos(cam.pitch), sp = std::sin(cam.pitch);
    Frame f;
    f.origin = {pose.position.x, pose.position.y, cam.mount_height};
    f.right = {sh, -ch, 0.0};
    f.forward = {ch * cp, sh * cp, -sp};
    f.down = {ch * sp, sh * sp, -cp};
    return f;
}

double dot3(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

}  // namespace

Vec3 world_to_camera(const CameraModel& cam, const Pose2D& pose, const Vec3& world_point) {
    const Frame f = camera_frame(cam, pose);
    const Vec3 rel = world_point - f.origin;
    return {dot3(rel, f.right), dot3(rel, f.down), dot3(rel, f.forward)};
}

Vec3 camera_dir_to_world(const CameraModel& cam, const Pose2D& pose, const Vec3& cam_dir) {
    const Frame f = camera_frame(cam, pose);
    return f.right * cam_dir.x + f.down * cam_dir.y + f.forward * cam_dir.z;
}

std::optional<Vec2> project_point(const CameraModel& cam, const Pose2D& pose, const Vec3& world_point) {
    const Vec3 pc = world_to_camera(cam, pose, world_point);
    if (pc.z <= cam.near_plane) return std::nullopt;
    return Vec2{cam.cx() + cam.fx() * pc.x / pc.z, cam.cy() + cam.fy() * pc.y / pc.z};
}

std::optional<BBox2D> project_cylinder(const CameraModel& cam, const Pose2D& pose,
                                       const Cylinder3D& cyl, int circle_samples) {
    double min_u = std::numeric_limits<double>::infinity();
    double max_u = -std::numeric_limits<double>::infinity();
    double min_v = min_u, max_v = max_u;
    bool any = false;

    // The silhouette extremes of a vertical cylinder lie on its top and
    // bottom circles, so sampling those suffices for a tight box.
    for (int ring = 0; ring < 2; ++ring) {
        const double z = ring == 0 ? 0.0 : cyl.height;
        for (int i = 0; i < circle_samples; ++i) {
            const double theta = 2.0 * kPi * i / circle_samples;
            const Vec3 p{cyl.center.x + cyl.radius * std::cos(theta),
                         cyl.center.y + cyl.radius * std::sin(theta), z};
            auto px = project_point(cam, pose, p);
            if (!px) continue;
            any = true;
            min_u = std::min(min_u, px->x);
            max_u = std::max(max_u, px->x);
            min_v = std::min(min_v, px->y);
            max_v = std::max(max_v, px->y);
        }
    }
    if (!any) return std::nullopt;
    if (max_u < 0.0 || min_u > cam.image_width || max_v < 0.0 || min_v > cam.image_height)
        return std::nullopt;
    return BBox2D{min_u, min_v, max_u - min_u, max_v - min_v};
}

std::optional<Vec2> pixel_to_ground(const CameraModel& cam, const Pose2D& pose, int col, int row) {
    const Frame f = camera_frame(cam, pose);
    const double u = (col + 0.5 - cam.cx()) / cam.fx();
    const double v = (row + 0.5 - cam.cy()) / cam.fy();
    const Vec3 dir = f.right * u + f.down * v + f.forward * 1.0;
    if (dir.z >= -1e-9) return std::nullopt;
    const double t = f.origin.z / -dir.z;
    if (t <= cam.near_plane) return std::nullopt;
    return Vec2{f.origin.x + t * dir.x, f.origin.y + t * dir.y};
}

std::optional<double> pixel_ground_range(const CameraModel& cam, const Pose2D& pose, int col, int row) {
    const Frame f = camera_frame(cam, pose);
    const double u = (col + 0.5 - cam.cx()) / cam.fx();
    const double v = (row + 0.5 - cam.cy()) / cam.fy();
    const Vec3 dir = f.right * u + f.down * v + f.forward * 1.0;
    if (dir.z >= -1e-9) return std::nullopt;
    const double t = f.origin.z / -dir.z;
    if (t <= cam.near_plane) return std::nullopt;
    return t;  // camera-frame z: dir has unit forward component
}

bool pixel_hits_cylinder(const CameraModel& cam, const Pose2D& pose, const Cylinder3D& cyl,
                         int col, int row, double* range) {
    const Frame f = camera_frame(cam, pose);
    const double u = (col + 0.5 - cam.cx()) / cam.fx();
    const double v = (row + 0.5 - cam.cy()) / cam.fy();
    const Vec3 dir = f.right * u + f.down * v + f.forward * 1.0;
    const Vec3& o = f.origin;

    double best = std::numeric_limits<double>::infinity();

    // Side surface.
    const double ox = o.x - cyl.center.x;
    const double oy = o.y - cyl.center.y;
    const double a = dir.x * dir.x + dir.y * dir.y;
    const double b = 2.0 * (ox * dir.x + oy * dir.y);
    const double c = ox * ox + oy * oy - cyl.radius * cyl.radius;
    if (a > 1e-15) {
        const double disc = b * b - 4.0 * a * c;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            for (double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
                if (t <= cam.near_plane) continue;
                const double z = o.z + t * dir.z;
                if (z < 0.0 || z > cyl.height) continue;
                best = std::min(best, t);
            }
        }
    }
    // Caps.
    if (std::abs(dir.z) > 1e-15) {
        for (double zc : {0.0, cyl.height}) {
            const double t = (zc - o.z) / dir.z;
            if (t <= cam.near_plane) continue;
            const double hx = ox + t * dir.x;
            const double hy = oy + t * dir.y;
            if (hx * hx + hy * hy <= cyl.radius * cyl.radius) best = std::min(best, t);
        }
    }
    if (!std::isfinite(best)) return false;
    if (range) *range = best;
    return true;
}

}  // namespace vf
