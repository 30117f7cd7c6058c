#pragma once

#include <optional>

#include "vf/geometry.hpp"

namespace vf {

// Upper-left anchored image box. Coordinates are real-valued; quantization
// to integer pixels happens only when rasterizing.
struct BBox2D {
    double x = 0.0;  // upper-left column
    double y = 0.0;  // upper-left row
    double w = 0.0;
    double h = 0.0;

    Vec2 center() const { return {x + w / 2.0, y + h / 2.0}; }
    double area() const { return w * h; }
};

// Vertical cylinder standing on the ground plane; stand-in for a pedestrian body.
struct Cylinder3D {
    Vec2 center;          // ground position of the axis
    double radius = 0.3;  // > 0
    double height = 1.7;  // > 0
};

// Pinhole camera mounted on the agent. Image plane is fixed at 180x84 to
// match the observation raster; camera frame is z forward, x right, y down.
// Positive pitch tilts the optical axis toward the ground.
struct CameraModel {
    double mount_height = 1.2;             // meters above ground
    double pitch = 0.0;                    // radians
    double horizontal_fov = deg2rad(90.0); // radians, in (0, pi)
    int image_width = 180;
    int image_height = 84;
    double near_plane = 0.1;               // meters

    double fx() const { return (image_width / 2.0) / std::tan(horizontal_fov / 2.0); }
    double fy() const { return fx(); }  // square pixels
    double cx() const { return image_width / 2.0; }
    double cy() const { return image_height / 2.0; }

    bool valid() const {
        return horizontal_fov > 0.0 && horizontal_fov < kPi && image_width > 0 &&
               image_height > 0 && mount_height > 0.0 && near_plane > 0.0;
    }
};

// Rigid transform of a world point (x, y ground plane, z up) into the camera
// frame of a camera at `pose` raised by mount_height.
Vec3 world_to_camera(const CameraModel& cam, const Pose2D& pose, const Vec3& world_point);

// Inverse rotation: camera-frame direction to world-frame direction.
Vec3 camera_dir_to_world(const CameraModel& cam, const Pose2D& pose, const Vec3& cam_dir);

// Pinhole projection to real-valued pixel coordinates (col, row).
// Absent when the point is at or behind the near plane.
std::optional<Vec2> project_point(const CameraModel& cam, const Pose2D& pose, const Vec3& world_point);

// Tight axis-aligned image box over the cylinder's silhouette, obtained from
// `circle_samples` points on each of the top and bottom circles. Absent when
// the cylinder is entirely behind the near plane or outside the frustum.
std::optional<BBox2D> project_cylinder(const CameraModel& cam, const Pose2D& pose,
                                       const Cylinder3D& cyl, int circle_samples = 32);

// Ground-plane intersection of the ray through pixel center (col+0.5, row+0.5).
// Absent for rays at or above the horizon.
std::optional<Vec2> pixel_to_ground(const CameraModel& cam, const Pose2D& pose, int col, int row);

// Parametric distance along the pixel ray to the ground hit (camera-frame z);
// used for painter ordering. Absent like pixel_to_ground.
std::optional<double> pixel_ground_range(const CameraModel& cam, const Pose2D& pose, int col, int row);

// True if the pixel ray hits the solid cylinder (side surface or caps).
// When it does, `range` receives the camera-frame z of the nearest hit.
bool pixel_hits_cylinder(const CameraModel& cam, const Pose2D& pose, const Cylinder3D& cyl,
                         int col, int row, double* range = nullptr);

}  // namespace vf
