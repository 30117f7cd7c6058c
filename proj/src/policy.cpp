#include "vf/policy.hpp"

#include <algorithm>
#include <cmath>

#include "vf/scenario.hpp"

namespace vf {

double PurePursuitPolicy::goal_bearing_right_deg(const PrivilegedBundle& priv) {
    const Vec2 to_goal = priv.goal - priv.agent_pose.position;
    const double ccw = normalize_angle(std::atan2(to_goal.y, to_goal.x) - priv.agent_pose.heading);
    return -rad2deg(ccw);  // positive when the goal lies to the right
}

Action PurePursuitPolicy::act(const PolicyInput& input) {
    if (!input.privileged) throw std::logic_error("pure-pursuit: privileged bundle required");
    const double bearing = goal_bearing_right_deg(*input.privileged);
    if (std::abs(bearing) <= deadband_deg_) return Action::noop();
    return Action::turn(bearing > 0.0 ? input.turn_alpha : -input.turn_alpha);
}

Action ForecastAvoidPolicy::act(const PolicyInput& input) {
    if (!input.privileged) throw std::logic_error("forecast-avoid: privileged bundle required");
    const PrivilegedBundle& priv = *input.privileged;
    if (!priv.forecasts || priv.forecast_space != ForecastSpace::world)
        return PurePursuitPolicy::act(input);

    const Vec2 pos = priv.agent_pose.position;
    const Vec2 fwd = priv.agent_pose.forward();
    const Vec2 right = priv.agent_pose.right();
    const double horizon_s = double(input.forecast_horizon * input.forecast_stride) * input.dt;
    const double corridor_len = input.agent_speed * horizon_s + priv.agent_radius;
    const Vec2 corridor_end = pos + fwd * corridor_len;
    const double half_width = priv.agent_radius + margin_ / 2.0;

    bool threat = false;
    double threat_along = 0.0;
    double threat_side = 0.0;
    for (const auto& forecast : *priv.forecasts) {
        for (const auto& entry : forecast.boxes) {
            const Vec2 center = entry.box.center();
            const double ped_radius = entry.box.w / 2.0;
            if (point_segment_distance(center, pos, corridor_end) >= half_width + ped_radius)
                continue;
            const double along = dot(center - pos, fwd);
            if (along < -ped_radius) continue;  // behind the agent
            if (!threat || along < threat_along) {
                threat = true;
                threat_along = along;
                threat_side = dot(center - pos, right);
            }
        }
    }
    if (!threat) return PurePursuitPolicy::act(input);

    constexpr double tie_eps = 0.05;  // meters
    if (std::abs(threat_side) < tie_eps) {
        const double goal_bearing = goal_bearing_right_deg(priv);
        return Action::turn(goal_bearing >= 0.0 ? input.turn_alpha : -input.turn_alpha);
    }
    // Steer away from the side the threat occupies.
    return Action::turn(threat_side > 0.0 ? -input.turn_alpha : input.turn_alpha);
}

Action PixelPolicy::act(const PolicyInput& input) {
    if (!input.observation || !input.camera)
        throw std::logic_error("pixel policy: observation and camera required");
    const LabelImage& img = input.observation->frames.back();
    const CameraModel& cam = *input.camera;
    const Pose2D ego({0.0, 0.0}, 0.0);  // ego frame: x forward, y left

    long left_threat = 0, right_threat = 0;
    double goal_col_sum = 0.0;
    long goal_count = 0;
    double road_col_sum = 0.0;
    long road_count = 0;

    const int horizon_row = int(cam.cy()) + 1;
    for (int row = 0; row < LabelImage::height; ++row) {
        for (int col = 0; col < LabelImage::width; ++col) {
            const auto c = static_cast<PixelClass>(img.at(col, row));
            if (c == PixelClass::goal) {
                goal_col_sum += col + 0.5;
                ++goal_count;
            } else if (c == PixelClass::road) {
                road_col_sum += col + 0.5;
                ++road_count;
            }
            if (row < horizon_row) continue;
            if (c != PixelClass::pedestrian && c != PixelClass::forecast_box &&
                c != PixelClass::forecast_path)
                continue;
            const auto ground = pixel_to_ground(cam, ego, col, row);
            if (!ground) continue;
            const double dist_fwd = ground->x;
            const double lateral_right = -ground->y;
            if (dist_fwd > params_.lookahead || dist_fwd <= 0.0) continue;
            if (std::abs(lateral_right) > params_.corridor_halfwidth) continue;
            (lateral_right < 0.0 ? left_threat : right_threat) += 1;
        }
    }

    // Steering column: goal pixels when visible, road centroid otherwise.
    double steer_col = cam.cx();
    if (goal_count >= 3)
        steer_col = goal_col_sum / double(goal_count);
    else if (road_count > 0)
        steer_col = road_col_sum / double(road_count);

    if (left_threat + right_threat >= params_.threat_min_pixels) {
        if (left_threat > right_threat) return Action::turn(input.turn_alpha);
        if (right_threat > left_threat) return Action::turn(-input.turn_alpha);
        return Action::turn(steer_col >= cam.cx() ? input.turn_alpha : -input.turn_alpha);
    }

    const double err = steer_col - cam.cx();
    if (std::abs(err) <= double(params_.deadband_px)) return Action::noop();
    return Action::turn(err > 0.0 ? input.turn_alpha : -input.turn_alpha);
}

PolicyFactory make_policy_factory(const std::string& name) {
    if (name == "straight") return [] { return std::make_unique<StraightPolicy>(); };
    if (name == "pure-pursuit") return [] { return std::make_unique<PurePursuitPolicy>(); };
    if (name == "forecast-avoid") return [] { return std::make_unique<ForecastAvoidPolicy>(); };
    if (name == "pixel") return [] { return std::make_unique<PixelPolicy>(); };
    throw ConfigError("unknown policy: " + name);
}

}  // namespace vf
