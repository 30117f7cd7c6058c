#pragma once

#include <deque>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "vf/camera.hpp"
#include "vf/scenario.hpp"
#include "vf/world.hpp"

namespace vf {

enum class ForecastSpace { world, image };
enum class ForecastAlgo { CVM, KF, GT };

const char* forecast_space_name(ForecastSpace s);
const char* forecast_algo_name(ForecastAlgo a);

// Center-form box used by the trackers. In image space (cx, cy) is the box
// center in pixels and (w, h) the box size; in world space (cx, cy) is the
// ground position in meters, w = 2 * radius and h = the body height.
struct BoxState {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;

    Vec2 center() const { return {cx, cy}; }
};

BoxState box_state_from_bbox(const BBox2D& b);
BBox2D bbox_from_box_state(const BoxState& b);
BoxState box_state_from_cylinder(const Cylinder3D& c);

// Fixed-capacity history of (step, box) samples for one tracked object.
// Step indices are strictly increasing and all samples share one space.
class TrackHistory {
public:
    TrackHistory(int object_id, ForecastSpace space, size_t window = 8)
        : object_id_(object_id), space_(space), window_(window) {}

    void push(long step, const BoxState& box);
    size_t size() const { return samples_.size(); }
    int object_id() const { return object_id_; }
    ForecastSpace space() const { return space_; }

    struct Sample {
        long step;
        BoxState box;
    };
    const std::deque<Sample>& samples() const { return samples_; }

private:
    int object_id_;
    ForecastSpace space_;
    size_t window_;
    std::deque<Sample> samples_;
};

// Ordered predictions at offsets {s, 2s, ..., H*s} frames from the last
// observation, tagged with the producing algorithm and space.
struct Forecast {
    int object_id = -1;
    ForecastAlgo algo = ForecastAlgo::CVM;
    ForecastSpace space = ForecastSpace::world;
    struct Entry {
        int offset;  // frames ahead
        BoxState box;
    };
    std::vector<Entry> boxes;
};

// Constant velocity extrapolation from the last two samples (or a
// least-squares fit over the window when window_fit is set). Empty when the
// history holds fewer than two samples. World-space forecasts keep the
// extent constant.
std::optional<Forecast> cvm_forecast(const TrackHistory& history, int horizon, int stride,
                                     bool window_fit = false);

struct KalmanConfig {
    double q_pos = 1e-2;       // process noise, position (per step^2)
    double q_size = 1e-2;      // process noise, box size
    double q_vel = 1e-4;       // process noise, velocities
    double r = 1e-2;           // measurement noise, all four channels
    double init_pos_var = 1e-2;
    double init_vel_var = 1.0;

    // Profile for noiseless measurement streams; pins the filter to the
    // data almost exactly.
    static KalmanConfig noiseless() {
        KalmanConfig c;
        c.q_pos = c.q_size = c.q_vel = 1e-12;
        c.r = 1e-12;
        c.init_pos_var = 1e-12;
        return c;
    }
};

// Constant-velocity filter state over (cx, cy, w, h) and their per-step
// velocities. Covariance stays symmetric positive semidefinite.
struct KalmanState {
    Eigen::Matrix<double, 8, 1> mean = Eigen::Matrix<double, 8, 1>::Zero();
    Eigen::Matrix<double, 8, 8> cov = Eigen::Matrix<double, 8, 8>::Zero();

    BoxState box() const { return {mean(0), mean(1), mean(2), mean(3)}; }
    // Symmetry + PSD check (tolerance on the smallest LDLT pivot).
    bool covariance_ok(double tol = 1e-9) const;
};

KalmanState kf_init(const BoxState& measurement, const KalmanConfig& config = {});

// One constant-velocity predict followed by a measurement update (Joseph
// form). `gap` is the number of frames since the previous measurement.
// Throws std::runtime_error on a non-invertible innovation covariance.
KalmanState kf_step(const KalmanState& state, const BoxState& measurement,
                    const KalmanConfig& config = {}, int gap = 1);

// Noise-free rollout of the current state at offsets {s, ..., H*s};
// negative predicted sizes are floored at 0.
Forecast kf_forecast(const KalmanState& state, int horizon, int stride,
                     int object_id = -1, ForecastSpace space = ForecastSpace::world);

// Ground-truth forecast: advances a copy of the pedestrian's deterministic
// motion and records the true boxes. Image-space boxes are projected with
// the current camera pose; when a projection is unavailable the previous
// box is carried forward (empty if the object is not visible at all).
// Throws std::invalid_argument for an unknown object id.
std::optional<Forecast> gt_forecast(const WorldState& world, const ScenarioConfig& config,
                                    int object_id, ForecastSpace space, int horizon, int stride);

// Mean / final center distance between predicted and actual boxes, in the
// forecast's space units. ade throws on length mismatch, fde on empty input.
double ade(const Forecast& predicted, const std::vector<BoxState>& actual);
double fde(const Forecast& predicted, const std::vector<BoxState>& actual);

}  // namespace vf
