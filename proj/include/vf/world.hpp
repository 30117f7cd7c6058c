#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "vf/camera.hpp"
#include "vf/geometry.hpp"
#include "vf/scenario.hpp"

namespace vf {

enum class ActionKind { NOOP, TURN };

// NOOP carries alpha_signed = 0; TURN carries +/- the configured magnitude
// (deg/s^2). Positive alpha steers rightward, negative leftward.
struct Action {
    ActionKind kind = ActionKind::NOOP;
    double alpha_signed = 0.0;

    static Action noop() { return {ActionKind::NOOP, 0.0}; }
    static Action turn(double alpha_signed) { return {ActionKind::TURN, alpha_signed}; }
};

// Angular velocity omega is stored in deg/s with positive = rightward
// (clockwise). Pose headings are CCW radians, so integration subtracts.
struct AgentState {
    Pose2D pose;
    double omega = 0.0;  // deg/s
};

struct PedestrianState {
    int id = 0;
    Cylinder3D extent;
    Vec2 position;
    double speed = 0.0;        // m/s, sampled once per episode
    size_t waypoint_index = 1; // waypoint currently walked toward
    std::vector<Vec2> waypoints;
};

enum class Cause { success, collision, out_of_bound, timeout };

const char* cause_name(Cause c);

struct StepOutcome {
    double reward = 0.0;  // one of {+10, -10, 0}
    bool terminated = false;
    std::optional<Cause> cause;
};

struct WorldState {
    AgentState agent;
    std::vector<PedestrianState> pedestrians;
    double elapsed = 0.0;
    long step_count = 0;
    std::mt19937_64 rng;
    bool terminated = false;
};

// Seeds an episode: pedestrian speeds drawn uniformly from their ranges,
// agent at the start pose with omega = 0. Throws ConfigError on invalid config.
WorldState sample_scenario(const ScenarioConfig& config, std::uint64_t seed);

// One control step of the steering model: TURN accumulates
// omega += alpha * kappa * dt (clamped to +/- omega_max), NOOP resets omega
// to 0; the heading then advances by the new omega and the position by
// speed * dt along the new heading.
AgentState apply_action(const AgentState& agent, const Action& action, const ScenarioConfig& config);

// Moves the pedestrian speed*dt along its waypoint polyline, looping from the
// last waypoint back to the first.
PedestrianState pedestrian_advance(const PedestrianState& ped, double dt);

// Post-step termination test, priority collision > out_of_bound > success > timeout.
std::optional<Cause> check_termination(const WorldState& world, const ScenarioConfig& config);

// Advances the world by one action. Throws std::logic_error when called on a
// terminated episode.
StepOutcome step(WorldState& world, const Action& action, const ScenarioConfig& config);

}  // namespace vf
