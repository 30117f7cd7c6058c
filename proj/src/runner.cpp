#include "vf/runner.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vf/rng.hpp"
#include "vf/scenario.hpp"

namespace vf {

void ApproachSpec::validate() const {
    if (!forecaster && mode.overlay != OverlayKind::none)
        throw ConfigError("approach: an overlay requires a forecaster");
}

std::string ApproachSpec::label() const {
    std::string s = mode.pedestrian_style == PedestrianStyle::box ? "seg(box)" : "seg";
    if (mode.overlay == OverlayKind::BOX) s += "+BOX";
    if (mode.overlay == OverlayKind::AP) s += "+AP";
    if (forecaster) {
        s += std::string("/") + forecast_algo_name(*forecaster);
        s += space == ForecastSpace::world ? "(3d)" : "(2d)";
    }
    return s;
}

ApproachSpec make_approach(const std::string& approach_name, const std::string& forecaster_name,
                           const std::string& space_name) {
    ApproachSpec spec;
    std::string a = approach_name;
    std::transform(a.begin(), a.end(), a.begin(), [](unsigned char c) { return std::tolower(c); });
    if (a == "seg") spec.mode = {PedestrianStyle::contour, OverlayKind::none};
    else if (a == "seg-box" || a == "seg(box)") spec.mode = {PedestrianStyle::box, OverlayKind::none};
    else if (a == "seg-box+box" || a == "seg(box)+box")
        spec.mode = {PedestrianStyle::box, OverlayKind::BOX};
    else if (a == "seg+ap") spec.mode = {PedestrianStyle::contour, OverlayKind::AP};
    else throw ConfigError("unknown approach: " + approach_name);

    if (forecaster_name == "none" || forecaster_name.empty()) spec.forecaster = std::nullopt;
    else if (forecaster_name == "cvm" || forecaster_name == "CVM") spec.forecaster = ForecastAlgo::CVM;
    else if (forecaster_name == "kf" || forecaster_name == "KF") spec.forecaster = ForecastAlgo::KF;
    else if (forecaster_name == "gt" || forecaster_name == "GT") spec.forecaster = ForecastAlgo::GT;
    else throw ConfigError("unknown forecaster: " + forecaster_name);

    if (space_name == "3d" || space_name == "world" || space_name.empty())
        spec.space = ForecastSpace::world;
    else if (space_name == "2d" || space_name == "image")
        spec.space = ForecastSpace::image;
    else throw ConfigError("unknown forecast space: " + space_name);

    spec.validate();
    return spec;
}

namespace {

// Per-pedestrian tracker state for one episode.
struct Tracker {
    TrackHistory history;
    std::optional<KalmanState> kf;
    long last_kf_step = 0;
};

std::vector<Forecast> compute_forecasts(const WorldState& world, const ScenarioConfig& config,
                                        const ApproachSpec& approach, std::vector<Tracker>& trackers,
                                        long step_index) {
    std::vector<Forecast> forecasts;
    if (!approach.forecaster) return forecasts;
    const int horizon = config.forecast_horizon;
    const int stride = config.forecast_stride;

    for (size_t i = 0; i < world.pedestrians.size(); ++i) {
        const auto& ped = world.pedestrians[i];
        Tracker& tracker = trackers[i];

        std::optional<BoxState> measurement;
        if (approach.space == ForecastSpace::world) {
            measurement = box_state_from_cylinder(ped.extent);
        } else if (auto box = project_cylinder(config.camera, world.agent.pose, ped.extent)) {
            measurement = box_state_from_bbox(*box);
        }

        if (measurement) {
            tracker.history.push(step_index, *measurement);
            if (approach.forecaster == ForecastAlgo::KF) {
                if (!tracker.kf) {
                    tracker.kf = kf_init(*measurement);
                } else {
                    const int gap = int(step_index - tracker.last_kf_step);
                    tracker.kf = kf_step(*tracker.kf, *measurement, {}, std::max(1, gap));
                }
                tracker.last_kf_step = step_index;
            }
        }

        std::optional<Forecast> forecast;
        switch (*approach.forecaster) {
            case ForecastAlgo::CVM:
                forecast = cvm_forecast(tracker.history, horizon, stride);
                break;
            case ForecastAlgo::KF:
                if (tracker.kf && tracker.history.size() >= 2)
                    forecast = kf_forecast(*tracker.kf, horizon, stride, ped.id, approach.space);
                break;
            case ForecastAlgo::GT:
                forecast = gt_forecast(world, config, ped.id, approach.space, horizon, stride);
                break;
        }
        if (forecast) {
            forecast->object_id = ped.id;
            forecasts.push_back(std::move(*forecast));
        }
    }
    return forecasts;
}

// Image-space boxes for one forecast; world-space entries are projected
// through the current camera.
std::vector<BBox2D> forecast_image_boxes(const Forecast& forecast, const WorldState& world,
                                         const ScenarioConfig& config) {
    std::vector<BBox2D> boxes;
    for (const auto& entry : forecast.boxes) {
        if (forecast.space == ForecastSpace::image) {
            boxes.push_back(bbox_from_box_state(entry.box));
        } else {
            Cylinder3D cyl{{entry.box.cx, entry.box.cy}, entry.box.w / 2.0, entry.box.h};
            if (auto box = project_cylinder(config.camera, world.agent.pose, cyl))
                boxes.push_back(*box);
        }
    }
    return boxes;
}

LabelImage render_frame(const WorldState& world, const ScenarioConfig& config,
                        const ApproachSpec& approach, const std::vector<Forecast>& forecasts) {
    LabelImage img = rasterize_scene(world, config, approach.mode);
    if (approach.mode.overlay == OverlayKind::none) return img;

    // Nearest pedestrian's overlay painted last.
    std::vector<std::pair<double, const Forecast*>> order;
    for (const auto& f : forecasts) {
        for (const auto& ped : world.pedestrians) {
            if (ped.id != f.object_id) continue;
            order.emplace_back(distance(ped.position, world.agent.pose.position), &f);
            break;
        }
    }
    std::sort(order.begin(), order.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    for (const auto& [dist, forecast] : order) {
        if (approach.mode.overlay == OverlayKind::BOX) {
            overlay_box_forecast(img, forecast_image_boxes(*forecast, world, config));
        } else {
            // AP: needs the current observed box and the final forecast box.
            const PedestrianState* ped = nullptr;
            for (const auto& p : world.pedestrians)
                if (p.id == forecast->object_id) { ped = &p; break; }
            if (!ped) continue;
            const auto current = project_cylinder(config.camera, world.agent.pose, ped->extent);
            if (!current) continue;
            const auto boxes = forecast_image_boxes(*forecast, world, config);
            if (boxes.empty()) continue;
            overlay_ap(img, *current, boxes.back());
        }
    }
    return img;
}

}  // namespace

EpisodeResult run_episode(const ScenarioConfig& config, const ApproachSpec& approach,
                          Policy& policy, std::uint64_t seed, const std::string& scenario_id,
                          const StepObserver& observer, bool observer_wants_pixels) {
    approach.validate();
    if (policy.needs_privileged() && approach.forecaster &&
        approach.space != ForecastSpace::world && policy.name() == "forecast-avoid")
        throw ConfigError("forecast-avoid requires world-space forecasts");

    WorldState world = sample_scenario(config, seed);
    const double shortest = shortest_path_length(config.agent_start.position, config.goal,
                                                 config.road_polygons);

    std::vector<Tracker> trackers;
    trackers.reserve(world.pedestrians.size());
    for (const auto& ped : world.pedestrians)
        trackers.push_back({TrackHistory(ped.id, approach.space), std::nullopt, 0});

    const bool render = policy.needs_pixels() || (observer && observer_wants_pixels);

    double path_length = 0.0;
    EpisodeRecord record;
    record.seed = seed;
    record.scenario_id = scenario_id;
    record.shortest_path = shortest;

    const long max_steps = long(std::ceil(config.time_limit / config.dt)) + 1;
    try {
        std::vector<Forecast> forecasts = compute_forecasts(world, config, approach, trackers, 0);
        ObservationStack stack;
        if (render) stack = ObservationStack::reset(render_frame(world, config, approach, forecasts));
        policy.on_reset(scenario_id, seed, render ? &stack : nullptr);

        for (long i = 0; i < max_steps; ++i) {
            if (observer) {
                StepTrace trace{world.step_count, &world, &forecasts, render ? &stack : nullptr};
                observer(trace);
            }

            PolicyInput input;
            input.observation = render ? &stack : nullptr;
            input.turn_alpha = config.turn_accel;
            input.camera = &config.camera;
            input.agent_speed = config.agent_speed;
            input.dt = config.dt;
            input.forecast_horizon = config.forecast_horizon;
            input.forecast_stride = config.forecast_stride;
            if (policy.needs_privileged()) {
                PrivilegedBundle priv;
                priv.agent_pose = world.agent.pose;
                priv.agent_omega = world.agent.omega;
                priv.goal = config.goal;
                priv.goal_radius = config.goal_radius;
                priv.agent_radius = config.agent_radius;
                priv.pedestrians = &world.pedestrians;
                priv.forecasts = &forecasts;
                priv.forecast_space = approach.space;
                input.privileged = priv;
            }

            const Vec2 before = world.agent.pose.position;
            const Action action = policy.act(input);
            const StepOutcome outcome = step(world, action, config);
            path_length += distance(world.agent.pose.position, before);

            forecasts = compute_forecasts(world, config, approach, trackers, world.step_count);
            if (render) stack = push_frame(stack, render_frame(world, config, approach, forecasts));

            PolicyInput result_input = input;
            result_input.observation = render ? &stack : nullptr;
            result_input.privileged.reset();
            policy.on_step_result(result_input, outcome);

            if (outcome.terminated) {
                record.cause = *outcome.cause;
                record.steps = world.step_count;
                record.path_length = path_length;
                if (observer) {
                    StepTrace trace{world.step_count, &world, &forecasts, render ? &stack : nullptr};
                    observer(trace);
                }
                return {record, {}};
            }
        }
    } catch (const ProtocolError& e) {
        return {std::nullopt, e.what()};
    }
    // The time-limit check fires inside step(); reaching here means the
    // configured limit is not an exact multiple of dt.
    record.cause = Cause::timeout;
    record.steps = world.step_count;
    record.path_length = path_length;
    return {record, {}};
}

int batch_threads() {
    int hw = int(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    if (const char* env = std::getenv("VF_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) return std::min(cap, hw);
    }
    return hw;
}

std::vector<EpisodeResult> run_batch_serial(const std::vector<EpisodeJob>& jobs) {
    std::vector<EpisodeResult> results(jobs.size());
    for (size_t i = 0; i < jobs.size(); ++i) {
        auto policy = jobs[i].make_policy();
        results[i] = run_episode(jobs[i].config, jobs[i].approach, *policy, jobs[i].seed,
                                 jobs[i].scenario_id);
    }
    return results;
}

std::vector<EpisodeResult> run_batch(const std::vector<EpisodeJob>& jobs) {
    for (const auto& job : jobs)
        if (!job.parallel_safe) return run_batch_serial(jobs);
#ifdef _OPENMP
    std::vector<EpisodeResult> results(jobs.size());
    const int threads = batch_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long i = 0; i < long(jobs.size()); ++i) {
        auto policy = jobs[i].make_policy();
        results[i] = run_episode(jobs[i].config, jobs[i].approach, *policy, jobs[i].seed,
                                 jobs[i].scenario_id);
    }
    return results;
#else
    return run_batch_serial(jobs);
#endif
}

}  // namespace vf
