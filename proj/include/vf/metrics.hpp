#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vf/geometry.hpp"
#include "vf/world.hpp"

namespace vf {

struct EpisodeRecord {
    Cause cause = Cause::timeout;
    double shortest_path = 0.0;  // l: start -> goal through the drivable region
    double path_length = 0.0;    // p: realized agent path
    long steps = 0;
    std::uint64_t seed = 0;
    std::string scenario_id;

    bool operator==(const EpisodeRecord& o) const = default;
};

// One table cell: rates over a set of episodes.
struct EvalCell {
    double spl = 0.0;
    double success = 0.0;
    double collision = 0.0;
    double oob = 0.0;
    double timeout = 0.0;
    long n = 0;
};

// Success weighted by path length: mean over episodes of
// 1{success} * l / max(l, p). Throws std::invalid_argument on an empty set.
double spl(const std::vector<EpisodeRecord>& records);

// Per-cause fractions plus SPL for one episode set.
EvalCell rates(const std::vector<EpisodeRecord>& records);

struct CellStats {
    EvalCell mean;
    EvalCell stddev;  // sample standard deviation (0 for a single seed)
    long seeds = 0;
};

// Unweighted mean and sample stddev across per-seed cells; shapes must agree.
CellStats aggregate_seeds(const std::vector<EvalCell>& per_seed);

// Shortest path start -> goal through the union of road polygons, via a
// visibility graph over the polygon vertices. Deterministic; returns +inf
// when no path exists.
double shortest_path_length(const Vec2& start, const Vec2& goal,
                            const std::vector<Polygon>& road_polygons);

}  // namespace vf
