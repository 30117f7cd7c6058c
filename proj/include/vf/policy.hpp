#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vf/forecast.hpp"
#include "vf/render.hpp"
#include "vf/world.hpp"

namespace vf {

// World-space state handed only to scripted policies; external-bridge
// policies never see it.
struct PrivilegedBundle {
    Pose2D agent_pose;
    double agent_omega = 0.0;
    Vec2 goal;
    double goal_radius = 0.0;
    double agent_radius = 0.5;
    const std::vector<PedestrianState>* pedestrians = nullptr;
    const std::vector<Forecast>* forecasts = nullptr;
    ForecastSpace forecast_space = ForecastSpace::world;
};

struct PolicyInput {
    const ObservationStack* observation = nullptr;  // present iff the policy needs pixels
    std::optional<PrivilegedBundle> privileged;
    double turn_alpha = 35.0;  // configured TURN magnitude, deg/s^2
    const CameraModel* camera = nullptr;
    double agent_speed = 6.0;
    double dt = 0.05;
    int forecast_horizon = 5;
    int forecast_stride = 4;
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual std::string name() const = 0;
    virtual bool needs_pixels() const { return false; }
    virtual bool needs_privileged() const { return false; }
    virtual bool parallel_safe() const { return true; }

    // Episode lifecycle; the bridge policy turns these into wire messages.
    virtual void on_reset(const std::string& scenario, std::uint64_t seed,
                          const ObservationStack* obs) {
        (void)scenario; (void)seed; (void)obs;
    }
    virtual Action act(const PolicyInput& input) = 0;
    virtual void on_step_result(const PolicyInput& input, const StepOutcome& outcome) {
        (void)input; (void)outcome;
    }
};

using PolicyFactory = std::function<std::unique_ptr<Policy>()>;

// Always NOOP.
class StraightPolicy final : public Policy {
public:
    std::string name() const override { return "straight"; }
    Action act(const PolicyInput&) override { return Action::noop(); }
};

// Steers toward the goal bearing; NOOP inside the deadband. For a goal at
// bearing +theta (to the right), emits TURN with positive alpha.
class PurePursuitPolicy : public Policy {
public:
    explicit PurePursuitPolicy(double deadband_deg = 5.0) : deadband_deg_(deadband_deg) {}
    std::string name() const override { return "pure-pursuit"; }
    bool needs_privileged() const override { return true; }
    Action act(const PolicyInput& input) override;

protected:
    static double goal_bearing_right_deg(const PrivilegedBundle& priv);
    double deadband_deg_;
};

// Pure pursuit plus forecast-based avoidance: when a predicted pedestrian
// footprint intersects the agent's swept corridor, turn away from the
// intersecting side; ties break toward the goal side. Requires world-space
// forecasts.
class ForecastAvoidPolicy final : public PurePursuitPolicy {
public:
    explicit ForecastAvoidPolicy(double margin = 0.3, double deadband_deg = 5.0)
        : PurePursuitPolicy(deadband_deg), margin_(margin) {}
    std::string name() const override { return "forecast-avoid"; }
    Action act(const PolicyInput& input) override;

private:
    double margin_;
};

// Reads the rendered observation only: steers by the goal-pixel (or road)
// centroid column and dodges pedestrian/forecast-class pixels found inside
// the projected corridor ahead.
class PixelPolicy final : public Policy {
public:
    struct Params {
        double corridor_halfwidth = 1.6;  // meters
        double lookahead = 10.0;          // meters
        int deadband_px = 3;
        int threat_min_pixels = 2;
    };
    PixelPolicy() = default;
    explicit PixelPolicy(const Params& params) : params_(params) {}
    std::string name() const override { return "pixel"; }
    bool needs_pixels() const override { return true; }
    Action act(const PolicyInput& input) override;

private:
    Params params_{};
};

// Built-in policy registry for the CLI: straight, pure-pursuit,
// forecast-avoid, pixel. Throws ConfigError for unknown names.
PolicyFactory make_policy_factory(const std::string& name);

}  // namespace vf
