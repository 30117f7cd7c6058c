#include "vf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace vf {

double spl(const std::vector<EpisodeRecord>& records) {
    if (records.empty()) throw std::invalid_argument("spl: empty record set");
    double sum = 0.0;
    for (const auto& r : records) {
        if (r.cause != Cause::success) continue;
        sum += r.shortest_path / std::max(r.shortest_path, r.path_length);
    }
    return sum / double(records.size());
}

EvalCell rates(const std::vector<EpisodeRecord>& records) {
    if (records.empty()) throw std::invalid_argument("rates: empty record set");
    EvalCell cell;
    cell.n = long(records.size());
    for (const auto& r : records) {
        switch (r.cause) {
            case Cause::success: cell.success += 1.0; break;
            case Cause::collision: cell.collision += 1.0; break;
            case Cause::out_of_bound: cell.oob += 1.0; break;
            case Cause::timeout: cell.timeout += 1.0; break;
        }
    }
    const double n = double(cell.n);
    cell.success /= n;
    cell.collision /= n;
    cell.oob /= n;
    cell.timeout /= n;
    cell.spl = spl(records);
    return cell;
}

CellStats aggregate_seeds(const std::vector<EvalCell>& per_seed) {
    if (per_seed.empty()) throw std::invalid_argument("aggregate_seeds: no reports");
    auto fields = [](const EvalCell& c) {
        return std::array<double, 5>{c.spl, c.success, c.collision, c.oob, c.timeout};
    };
    std::array<double, 5> mean{}, var{};
    for (const auto& cell : per_seed) {
        const auto f = fields(cell);
        for (int i = 0; i < 5; ++i) mean[i] += f[i];
    }
    const double n = double(per_seed.size());
    for (auto& m : mean) m /= n;
    if (per_seed.size() > 1) {
        for (const auto& cell : per_seed) {
            const auto f = fields(cell);
            for (int i = 0; i < 5; ++i) var[i] += (f[i] - mean[i]) * (f[i] - mean[i]);
        }
        for (auto& v : var) v = v / (n - 1.0);
    }

    CellStats stats;
    stats.seeds = long(per_seed.size());
    stats.mean = {mean[0], mean[1], mean[2], mean[3], mean[4], per_seed.front().n};
    stats.stddev = {std::sqrt(var[0]), std::sqrt(var[1]), std::sqrt(var[2]),
                    std::sqrt(var[3]), std::sqrt(var[4]), 0};
    return stats;
}

namespace {

// True if the whole segment lies inside the union of the polygons: split at
// every boundary crossing and test each piece's midpoint.
bool segment_inside_union(const Vec2& a, const Vec2& b, const std::vector<Polygon>& polys) {
    if (!point_in_any(a, polys) || !point_in_any(b, polys)) return false;
    std::vector<double> params = {0.0, 1.0};
    const Vec2 ab = b - a;
    for (const auto& poly : polys) {
        const size_t n = poly.size();
        for (size_t i = 0, j = n - 1; i < n; j = i++) {
            const Vec2& c = poly[j];
            const Vec2& d = poly[i];
            const Vec2 cd = d - c;
            const double denom = cross(ab, cd);
            if (std::abs(denom) < 1e-12) {
                // Parallel; for the collinear case record the edge endpoints' params.
                if (std::abs(cross(c - a, ab)) < 1e-9 && ab.squared_norm() > 0.0) {
                    params.push_back(std::clamp(dot(c - a, ab) / ab.squared_norm(), 0.0, 1.0));
                    params.push_back(std::clamp(dot(d - a, ab) / ab.squared_norm(), 0.0, 1.0));
                }
                continue;
            }
            const double t = cross(c - a, cd) / denom;
            const double u = cross(c - a, ab) / denom;
            if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) params.push_back(t);
        }
    }
    std::sort(params.begin(), params.end());
    for (size_t i = 0; i + 1 < params.size(); ++i) {
        const double mid = (params[i] + params[i + 1]) / 2.0;
        if (!point_in_any(a + ab * mid, polys)) return false;
    }
    return true;
}

}  // namespace

double shortest_path_length(const Vec2& start, const Vec2& goal,
                            const std::vector<Polygon>& road_polygons) {
    std::vector<Vec2> nodes = {start, goal};
    for (const auto& poly : road_polygons)
        for (const auto& v : poly) nodes.push_back(v);

    // Reflex corners of the union lie where boundaries of different polygons
    // cross; add those crossings as graph nodes.
    for (size_t pi = 0; pi < road_polygons.size(); ++pi) {
        for (size_t pj = pi + 1; pj < road_polygons.size(); ++pj) {
            const Polygon& A = road_polygons[pi];
            const Polygon& B = road_polygons[pj];
            for (size_t i = 0, i2 = A.size() - 1; i < A.size(); i2 = i++) {
                for (size_t j = 0, j2 = B.size() - 1; j < B.size(); j2 = j++) {
                    const Vec2 ab = A[i] - A[i2];
                    const Vec2 cd = B[j] - B[j2];
                    const double denom = cross(ab, cd);
                    if (std::abs(denom) < 1e-12) continue;
                    const double t = cross(B[j2] - A[i2], cd) / denom;
                    const double u = cross(B[j2] - A[i2], ab) / denom;
                    if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0)
                        nodes.push_back(A[i2] + ab * t);
                }
            }
        }
    }

    const size_t n = nodes.size();
    std::vector<std::vector<std::pair<size_t, double>>> adj(n);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            if (segment_inside_union(nodes[i], nodes[j], road_polygons)) {
                const double d = distance(nodes[i], nodes[j]);
                adj[i].emplace_back(j, d);
                adj[j].emplace_back(i, d);
            }
        }
    }

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, inf);
    dist[0] = 0.0;
    using Item = std::pair<double, size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    heap.push({0.0, 0});
    while (!heap.empty()) {
        const auto [d, i] = heap.top();
        heap.pop();
        if (d > dist[i]) continue;
        if (i == 1) return d;
        for (const auto& [j, w] : adj[i]) {
            if (dist[i] + w < dist[j]) {
                dist[j] = dist[i] + w;
                heap.push({dist[j], j});
            }
        }
    }
    return inf;
}

}  // namespace vf
