#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vf/metrics.hpp"
#include "vf/policy.hpp"
#include "vf/render.hpp"
#include "vf/runner_types.hpp"

namespace vf {

// Per-step view handed to an optional observer (visualization dumps,
// forecast-quality bookkeeping). Valid only during the callback.
struct StepTrace {
    long step = 0;
    const WorldState* world = nullptr;
    const std::vector<Forecast>* forecasts = nullptr;  // approach space
    const ObservationStack* observation = nullptr;     // null when not rendered
};

using StepObserver = std::function<void(const StepTrace&)>;

struct EpisodeResult {
    std::optional<EpisodeRecord> record;  // absent on protocol error
    std::string error;
};

// Runs one closed-loop episode. Rendering happens only when the policy (or
// an observer with want_observation) needs pixels.
EpisodeResult run_episode(const ScenarioConfig& config, const ApproachSpec& approach,
                          Policy& policy, std::uint64_t seed, const std::string& scenario_id,
                          const StepObserver& observer = nullptr, bool observer_wants_pixels = false);

struct EpisodeJob {
    ScenarioConfig config;
    ApproachSpec approach;
    PolicyFactory make_policy;
    std::uint64_t seed = 0;
    std::string scenario_id;
    bool parallel_safe = true;  // false serializes the whole batch (bridge runs)
};

// Thread cap for the parallel batch: min(VF_THREADS if set, hardware).
int batch_threads();

// OpenMP-parallel batch; results come back in job order so the report is
// independent of the schedule. Jobs whose policies are not parallel-safe
// (the bridge) force the serial path.
std::vector<EpisodeResult> run_batch(const std::vector<EpisodeJob>& jobs);

// Serial reference for the parallel batch, kept for equivalence tests and
// the benchmark.
std::vector<EpisodeResult> run_batch_serial(const std::vector<EpisodeJob>& jobs);

}  // namespace vf
