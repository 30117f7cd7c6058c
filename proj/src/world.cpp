#include "vf/world.hpp"

#include <algorithm>
#include <stdexcept>

#include "vf/rng.hpp"

namespace vf {

const char* cause_name(Cause c) {
    switch (c) {
        case Cause::success: return "success";
        case Cause::collision: return "collision";
        case Cause::out_of_bound: return "out_of_bound";
        case Cause::timeout: return "timeout";
    }
    return "?";
}

WorldState sample_scenario(const ScenarioConfig& config, std::uint64_t seed) {
    config.validate();
    WorldState w;
    w.rng.seed(seed);
    w.agent.pose = config.agent_start;
    w.agent.omega = 0.0;
    int next_id = 0;
    for (const auto& spec : config.pedestrians) {
        PedestrianState ped;
        ped.id = next_id++;
        ped.waypoints = spec.waypoints;
        ped.position = spec.waypoints.front();
        ped.waypoint_index = 1 % spec.waypoints.size();
        ped.speed = uniform_double(w.rng, spec.speed_min, spec.speed_max);
        ped.extent = Cylinder3D{ped.position, spec.radius, spec.height};
        w.pedestrians.push_back(std::move(ped));
    }
    return w;
}

AgentState apply_action(const AgentState& agent, const Action& action, const ScenarioConfig& config) {
    AgentState next = agent;
    if (action.kind == ActionKind::TURN) {
        next.omega = std::clamp(next.omega + action.alpha_signed * config.steering_gain * config.dt,
                                -config.omega_max, config.omega_max);
    } else {
        next.omega = 0.0;  // NOOP holds the current orientation
    }
    // omega is clockwise-positive while headings are CCW.
    const double heading = normalize_angle(agent.pose.heading - deg2rad(next.omega) * config.dt);
    next.pose = Pose2D(agent.pose.position, heading);
    next.pose.position += next.pose.forward() * (config.agent_speed * config.dt);
    return next;
}

PedestrianState pedestrian_advance(const PedestrianState& ped, double dt) {
    PedestrianState next = ped;
    double remaining = ped.speed * dt;
    if (remaining <= 0.0 || ped.waypoints.size() < 2) return next;

    // Guard against polylines whose points all coincide.
    double total = 0.0;
    for (size_t i = 0; i < next.waypoints.size(); ++i)
        total += distance(next.waypoints[i], next.waypoints[(i + 1) % next.waypoints.size()]);
    if (total < 1e-12) return next;

    while (remaining > 0.0) {
        const Vec2 target = next.waypoints[next.waypoint_index];
        const double d = distance(next.position, target);
        if (d > remaining) {
            next.position += (target - next.position) * (remaining / d);
            break;
        }
        next.position = target;
        remaining -= d;
        next.waypoint_index = (next.waypoint_index + 1) % next.waypoints.size();
    }
    next.extent.center = next.position;
    return next;
}

std::optional<Cause> check_termination(const WorldState& world, const ScenarioConfig& config) {
    const Vec2& pos = world.agent.pose.position;
    for (const auto& ped : world.pedestrians) {
        if (distance(pos, ped.position) < config.agent_radius + ped.extent.radius)
            return Cause::collision;
    }
    if (!point_in_any(pos, config.road_polygons)) return Cause::out_of_bound;
    if (distance(pos, config.goal) <= config.goal_radius) return Cause::success;
    if (world.elapsed >= config.time_limit - 1e-9) return Cause::timeout;
    return std::nullopt;
}

StepOutcome step(WorldState& world, const Action& action, const ScenarioConfig& config) {
    if (world.terminated) throw std::logic_error("step called on terminated episode");

    world.agent = apply_action(world.agent, action, config);
    for (auto& ped : world.pedestrians) ped = pedestrian_advance(ped, config.dt);
    world.step_count += 1;
    world.elapsed = world.step_count * config.dt;

    StepOutcome out;
    out.cause = check_termination(world, config);
    if (out.cause) {
        out.terminated = true;
        world.terminated = true;
        out.reward = *out.cause == Cause::success ? 10.0 : -10.0;
    }
    return out;
}

}  // namespace vf
