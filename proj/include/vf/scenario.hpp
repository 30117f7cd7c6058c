#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "vf/camera.hpp"
#include "vf/geometry.hpp"

namespace vf {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PedestrianSpec {
    std::vector<Vec2> waypoints;  // >= 2 points; traversed cyclically
    double speed_min = 0.6;      // m/s
    double speed_max = 1.2;
    double radius = 0.3;
    double height = 1.7;
};

struct ScenarioConfig {
    std::string name;
    std::vector<Polygon> road_polygons;      // drivable region (union)
    std::vector<Polygon> boundary_polygons;  // prohibited, rendered as boundary class
    Pose2D agent_start;
    Vec2 goal;
    double goal_radius = 1.5;
    std::vector<PedestrianSpec> pedestrians;
    double time_limit = 30.0;     // seconds
    double dt = 0.05;             // seconds
    double agent_speed = 6.0;     // m/s, constant
    double turn_accel = 35.0;     // alpha magnitude, deg/s^2
    double steering_gain = 2.0;   // kappa
    double omega_max = 90.0;      // deg/s
    double agent_radius = 0.5;    // meters
    int forecast_horizon = 5;     // H intervals
    int forecast_stride = 4;      // s frames per interval
    CameraModel camera;

    // Throws ConfigError on violated invariants (goal off-road, bad ranges, ...).
    void validate() const;
};

// Strict JSON (schema_version required, unknown fields rejected).
ScenarioConfig scenario_from_json(const std::string& text);
std::string scenario_to_json(const ScenarioConfig& config);
ScenarioConfig load_scenario_file(const std::string& path);

// Route for the urban-grid preset: start pose plus goal.
struct Route {
    Pose2D start;
    Vec2 goal;
};

struct RouteSets {
    std::vector<Route> seen;    // training combinations
    std::vector<Route> unseen;  // evaluation combinations
};

ScenarioConfig make_s_turn();
RouteSets urban_grid_routes();
ScenarioConfig make_urban_grid(const Route& route);

// Resolves "s-turn", "urban-grid", "urban-grid:seen:3", "urban-grid:unseen:1",
// or a path to a scenario JSON file.
ScenarioConfig resolve_scenario(const std::string& spec);

// Overrides every pedestrian speed range with [lo, hi].
void apply_speed_band(ScenarioConfig& config, double lo, double hi);

}  // namespace vf
