// Compares the serial batch runner against the OpenMP one on a fixed
// rendering-heavy workload and checks that both produce identical records.

#include <chrono>
#include <cstdio>
#include <vector>

#include "vf/runner.hpp"
#include "vf/scenario.hpp"

using namespace vf;
using Clock = std::chrono::steady_clock;

namespace {

std::vector<EpisodeJob> make_workload(int episodes) {
    const ScenarioConfig config = make_s_turn();
    std::vector<EpisodeJob> jobs;
    for (int e = 0; e < episodes; ++e) {
        EpisodeJob job;
        job.config = config;
        job.approach = make_approach("seg-box+box", "cvm", "3d");
        job.make_policy = make_policy_factory("pixel");
        job.seed = std::uint64_t(e + 1);
        job.scenario_id = "s-turn";
        jobs.push_back(std::move(job));
    }
    return jobs;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    int episodes = 16;
    if (argc > 1) episodes = std::atoi(argv[1]);
    const auto jobs = make_workload(episodes);

    std::printf("episodes: %d (pixel policy, seg(box)+BOX overlay)\n", episodes);

    const auto t_serial = Clock::now();
    const auto serial = run_batch_serial(jobs);
    const double serial_s = seconds_since(t_serial);
    std::printf("serial reference: %7.3f s  (%.1f eps/s)\n", serial_s, episodes / serial_s);

    const auto t_parallel = Clock::now();
    const auto parallel = run_batch(jobs);
    const double parallel_s = seconds_since(t_parallel);
    std::printf("openmp (%d thr):  %7.3f s  (%.1f eps/s)  speedup %.2fx\n", batch_threads(),
                parallel_s, episodes / parallel_s, serial_s / parallel_s);

    for (size_t i = 0; i < jobs.size(); ++i) {
        if (!serial[i].record || !parallel[i].record || !(*serial[i].record == *parallel[i].record)) {
            std::printf("MISMATCH at episode %zu\n", i);
            return 1;
        }
    }
    std::printf("serial and parallel records identical\n");
    return 0;
}
