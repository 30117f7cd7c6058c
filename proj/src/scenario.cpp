#include "vf/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace vf {

using json = nlohmann::ordered_json;

void ScenarioConfig::validate() const {
    if (road_polygons.empty()) throw ConfigError("scenario: no road polygons");
    for (const auto& poly : road_polygons)
        if (poly.size() < 3) throw ConfigError("scenario: road polygon with < 3 vertices");
    if (dt <= 0.0) throw ConfigError("scenario: dt must be > 0");
    if (time_limit <= 0.0) throw ConfigError("scenario: time_limit must be > 0");
    if (agent_speed <= 0.0) throw ConfigError("scenario: agent_speed must be > 0");
    if (goal_radius <= 0.0) throw ConfigError("scenario: goal_radius must be > 0");
    if (agent_radius <= 0.0) throw ConfigError("scenario: agent_radius must be > 0");
    if (omega_max <= 0.0) throw ConfigError("scenario: omega_max must be > 0");
    if (forecast_horizon < 1) throw ConfigError("scenario: forecast_horizon must be >= 1");
    if (forecast_stride < 1) throw ConfigError("scenario: forecast_stride must be >= 1");
    if (!camera.valid()) throw ConfigError("scenario: invalid camera model");
    if (!point_in_any(goal, road_polygons)) throw ConfigError("scenario: goal outside drivable region");
    if (!point_in_any(agent_start.position, road_polygons))
        throw ConfigError("scenario: agent start outside drivable region");
    for (const auto& ped : pedestrians) {
        if (ped.waypoints.size() < 2) throw ConfigError("scenario: pedestrian needs >= 2 waypoints");
        if (ped.speed_min > ped.speed_max) throw ConfigError("scenario: pedestrian speed_min > speed_max");
        if (ped.speed_min < 0.0) throw ConfigError("scenario: negative pedestrian speed");
        if (ped.radius <= 0.0 || ped.height <= 0.0)
            throw ConfigError("scenario: pedestrian radius/height must be > 0");
        if (distance(ped.waypoints.front(), agent_start.position) <= agent_radius + ped.radius)
            throw ConfigError("scenario: pedestrian overlaps agent start");
    }
}

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const char* where) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) { ok = true; break; }
        if (!ok) throw ConfigError(std::string("scenario: unknown field '") + key + "' in " + where);
    }
}

Vec2 parse_vec2(const json& j, const char* where) {
    if (!j.is_array() || j.size() != 2)
        throw ConfigError(std::string("scenario: expected [x, y] in ") + where);
    return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<Polygon> parse_polygons(const json& j, const char* where) {
    std::vector<Polygon> out;
    for (const auto& jp : j) {
        Polygon poly;
        for (const auto& jv : jp) poly.push_back(parse_vec2(jv, where));
        out.push_back(std::move(poly));
    }
    return out;
}

json dump_polygons(const std::vector<Polygon>& polys) {
    json out = json::array();
    for (const auto& poly : polys) {
        json jp = json::array();
        for (const auto& v : poly) jp.push_back({v.x, v.y});
        out.push_back(std::move(jp));
    }
    return out;
}

}  // namespace

ScenarioConfig scenario_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("scenario: JSON parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("scenario: top level must be an object");
    if (!j.contains("schema_version")) throw ConfigError("scenario: missing schema_version");
    if (j["schema_version"].get<int>() != 1)
        throw ConfigError("scenario: unsupported schema_version");

    reject_unknown(j,
                   {"schema_version", "name", "road_polygons", "boundary_polygons", "agent_start",
                    "goal", "pedestrians", "time_limit", "dt", "agent_speed", "turn_accel",
                    "steering_gain", "omega_max", "agent_radius", "forecast_horizon",
                    "forecast_stride", "camera"},
                   "scenario");

    ScenarioConfig c;
    c.name = j.value("name", std::string{});
    if (j.contains("road_polygons")) c.road_polygons = parse_polygons(j["road_polygons"], "road_polygons");
    if (j.contains("boundary_polygons"))
        c.boundary_polygons = parse_polygons(j["boundary_polygons"], "boundary_polygons");

    if (!j.contains("agent_start") || !j.contains("goal"))
        throw ConfigError("scenario: agent_start and goal are required");
    const json& js = j["agent_start"];
    reject_unknown(js, {"position", "heading"}, "agent_start");
    c.agent_start = Pose2D(parse_vec2(js.at("position"), "agent_start"), js.value("heading", 0.0));

    const json& jg = j["goal"];
    reject_unknown(jg, {"position", "radius"}, "goal");
    c.goal = parse_vec2(jg.at("position"), "goal");
    c.goal_radius = jg.value("radius", 1.5);

    if (j.contains("pedestrians")) {
        for (const auto& jp : j["pedestrians"]) {
            reject_unknown(jp, {"waypoints", "speed_range", "radius", "height"}, "pedestrians");
            PedestrianSpec ped;
            for (const auto& jw : jp.at("waypoints")) ped.waypoints.push_back(parse_vec2(jw, "waypoints"));
            const json& jr = jp.at("speed_range");
            if (!jr.is_array() || jr.size() != 2)
                throw ConfigError("scenario: speed_range must be [min, max]");
            ped.speed_min = jr[0].get<double>();
            ped.speed_max = jr[1].get<double>();
            ped.radius = jp.value("radius", 0.3);
            ped.height = jp.value("height", 1.7);
            c.pedestrians.push_back(std::move(ped));
        }
    }

    c.time_limit = j.value("time_limit", c.time_limit);
    c.dt = j.value("dt", c.dt);
    c.agent_speed = j.value("agent_speed", c.agent_speed);
    c.turn_accel = j.value("turn_accel", c.turn_accel);
    c.steering_gain = j.value("steering_gain", c.steering_gain);
    c.omega_max = j.value("omega_max", c.omega_max);
    c.agent_radius = j.value("agent_radius", c.agent_radius);
    c.forecast_horizon = j.value("forecast_horizon", c.forecast_horizon);
    c.forecast_stride = j.value("forecast_stride", c.forecast_stride);

    if (j.contains("camera")) {
        const json& jc = j["camera"];
        reject_unknown(jc, {"mount_height", "pitch", "horizontal_fov"}, "camera");
        c.camera.mount_height = jc.value("mount_height", c.camera.mount_height);
        c.camera.pitch = jc.value("pitch", c.camera.pitch);
        c.camera.horizontal_fov = jc.value("horizontal_fov", c.camera.horizontal_fov);
    }

    c.validate();
    return c;
}

std::string scenario_to_json(const ScenarioConfig& c) {
    json j;
    j["schema_version"] = 1;
    j["name"] = c.name;
    j["road_polygons"] = dump_polygons(c.road_polygons);
    j["boundary_polygons"] = dump_polygons(c.boundary_polygons);
    j["agent_start"] = {{"position", {c.agent_start.position.x, c.agent_start.position.y}},
                        {"heading", c.agent_start.heading}};
    j["goal"] = {{"position", {c.goal.x, c.goal.y}}, {"radius", c.goal_radius}};
    json jps = json::array();
    for (const auto& ped : c.pedestrians) {
        json jw = json::array();
        for (const auto& w : ped.waypoints) jw.push_back({w.x, w.y});
        jps.push_back({{"waypoints", std::move(jw)},
                       {"speed_range", {ped.speed_min, ped.speed_max}},
                       {"radius", ped.radius},
                       {"height", ped.height}});
    }
    j["pedestrians"] = std::move(jps);
    j["time_limit"] = c.time_limit;
    j["dt"] = c.dt;
    j["agent_speed"] = c.agent_speed;
    j["turn_accel"] = c.turn_accel;
    j["steering_gain"] = c.steering_gain;
    j["omega_max"] = c.omega_max;
    j["agent_radius"] = c.agent_radius;
    j["forecast_horizon"] = c.forecast_horizon;
    j["forecast_stride"] = c.forecast_stride;
    j["camera"] = {{"mount_height", c.camera.mount_height},
                   {"pitch", c.camera.pitch},
                   {"horizontal_fov", c.camera.horizontal_fov}};
    return j.dump(2) + "\n";
}

ScenarioConfig load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return scenario_from_json(ss.str());
}

namespace {

// Offsets a polyline sideways (positive = left of travel direction).
std::vector<Vec2> offset_polyline(const std::vector<Vec2>& line, double offset) {
    std::vector<Vec2> out;
    const size_t n = line.size();
    for (size_t i = 0; i < n; ++i) {
        Vec2 dir_prev, dir_next;
        if (i > 0) {
            Vec2 d = line[i] - line[i - 1];
            dir_prev = d / d.norm();
        }
        if (i + 1 < n) {
            Vec2 d = line[i + 1] - line[i];
            dir_next = d / d.norm();
        }
        if (i == 0) dir_prev = dir_next;
        if (i + 1 == n) dir_next = dir_prev;
        Vec2 avg = (dir_prev + dir_next) * 0.5;
        double len = avg.norm();
        if (len < 1e-9) avg = dir_prev; else avg = avg / len;
        Vec2 normal{-avg.y, avg.x};
        double scale = offset / std::max(0.1, dot(normal, Vec2{-dir_prev.y, dir_prev.x}));
        out.push_back(line[i] + normal * scale);
    }
    return out;
}

Polygon rect(double x0, double y0, double x1, double y1) {
    return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

}  // namespace

ScenarioConfig make_s_turn() {
    ScenarioConfig c;
    c.name = "s-turn";

    const std::vector<Vec2> center{{-2.0, 6.0}, {18.0, 6.0}, {42.0, 18.0}, {62.0, 18.0}};
    const double road_width = 14.0;
    c.road_polygons = {thicken_polyline(center, road_width)};
    c.boundary_polygons = {thicken_polyline(offset_polyline(center, 8.5), 3.0),
                           thicken_polyline(offset_polyline(center, -8.5), 3.0)};

    c.agent_start = Pose2D({2.0, 6.0}, 0.0);
    c.goal = {58.0, 18.0};
    c.goal_radius = 1.5;

    // Crossing pedestrians centered on the start-goal chord, looping back
    // and forth across the agent's likely corridor.
    auto chord_y = [&](double x) { return 6.0 + 12.0 * (x - 2.0) / 56.0; };
    const double span = 6.5;
    int flip = 0;
    for (double x : {14.0, 21.0, 28.0, 35.0, 42.0}) {
        PedestrianSpec ped;
        const double yc = chord_y(x) - 1.0;
        Vec2 a{x, yc - span}, b{x, yc + span};
        if (flip++ % 2 == 0) std::swap(a, b);
        ped.waypoints = {a, b};
        ped.speed_min = 0.6;
        ped.speed_max = 1.2;
        c.pedestrians.push_back(std::move(ped));
    }

    c.validate();
    return c;
}

RouteSets urban_grid_routes() {
    // 4 vertical streets (x = 0, 20, 40, 60) and 2 horizontal (y = 0, 20),
    // giving 8 intersections. Endpoints sit just inside the street stubs.
    auto bottom = [](int i) { return Route{Pose2D({20.0 * i, -8.0}, kPi / 2.0), {}}; };
    auto top = [](int i) { return Route{Pose2D({20.0 * i, 28.0}, -kPi / 2.0), {}}; };
    auto left = [](int k) { return Route{Pose2D({-8.0, 20.0 * k}, 0.0), {}}; };

    auto mk = [](Route from, Vec2 goal) {
        from.goal = goal;
        return from;
    };
    const Vec2 T[4] = {{0, 28}, {20, 28}, {40, 28}, {60, 28}};
    const Vec2 B[4] = {{0, -8}, {20, -8}, {40, -8}, {60, -8}};
    const Vec2 L[2] = {{-8, 0}, {-8, 20}};
    const Vec2 R[2] = {{68, 0}, {68, 20}};

    RouteSets sets;
    sets.seen = {
        mk(bottom(0), T[0]), mk(bottom(1), T[1]), mk(bottom(2), T[2]), mk(bottom(3), T[3]),
        mk(left(0), R[0]),   mk(left(1), R[1]),   mk(bottom(0), R[0]), mk(bottom(1), T[0]),
        mk(bottom(2), R[1]), mk(left(0), T[1]),   mk(top(0), R[1]),    mk(top(3), B[2]),
    };
    sets.unseen = {mk(bottom(0), T[3]), mk(left(1), R[0]), mk(top(2), B[1]), mk(bottom(3), L[0])};
    return sets;
}

ScenarioConfig make_urban_grid(const Route& route) {
    ScenarioConfig c;
    c.name = "urban-grid";

    const double half = 4.0;
    for (int i = 0; i < 4; ++i)
        c.road_polygons.push_back(rect(20.0 * i - half, -10.0, 20.0 * i + half, 30.0));
    for (int k = 0; k < 2; ++k)
        c.road_polygons.push_back(rect(-10.0, 20.0 * k - half, 70.0, 20.0 * k + half));

    // City blocks between the streets.
    for (int i = 0; i < 3; ++i)
        c.boundary_polygons.push_back(rect(20.0 * i + half, half, 20.0 * (i + 1) - half, 20.0 - half));

    c.agent_start = route.start;
    c.goal = route.goal;
    c.goal_radius = 1.5;
    c.time_limit = 60.0;

    // Pedestrians strolling along and across the streets.
    const struct {
        Vec2 a, b;
    } walks[] = {
        {{6.0, 0.0}, {34.0, 0.0}},   {{26.0, 20.0}, {54.0, 20.0}}, {{20.0, 6.0}, {20.0, 14.0}},
        {{40.0, -6.0}, {40.0, 8.0}}, {{0.0, 8.0}, {0.0, 24.0}},    {{60.0, 12.0}, {60.0, 26.0}},
    };
    for (const auto& w : walks) {
        PedestrianSpec ped;
        ped.waypoints = {w.a, w.b};
        c.pedestrians.push_back(std::move(ped));
    }

    c.validate();
    return c;
}

ScenarioConfig resolve_scenario(const std::string& spec) {
    if (spec == "s-turn") return make_s_turn();
    if (spec.rfind("urban-grid", 0) == 0) {
        const RouteSets sets = urban_grid_routes();
        if (spec == "urban-grid") return make_urban_grid(sets.unseen.front());
        // urban-grid:<seen|unseen>:<index>
        const auto p1 = spec.find(':');
        const auto p2 = spec.find(':', p1 + 1);
        if (p1 == std::string::npos || p2 == std::string::npos)
            throw ConfigError("scenario spec: expected urban-grid:<seen|unseen>:<index>");
        const std::string set = spec.substr(p1 + 1, p2 - p1 - 1);
        const size_t idx = std::stoul(spec.substr(p2 + 1));
        const auto& routes = set == "seen" ? sets.seen
                            : set == "unseen" ? sets.unseen
                            : throw ConfigError("scenario spec: route set must be seen|unseen");
        if (idx >= routes.size()) throw ConfigError("scenario spec: route index out of range");
        return make_urban_grid(routes[idx]);
    }
    if (std::filesystem::exists(spec)) return load_scenario_file(spec);
    throw ConfigError("unknown scenario: " + spec);
}

void apply_speed_band(ScenarioConfig& config, double lo, double hi) {
    if (lo > hi || lo < 0.0) throw ConfigError("speed band: invalid range");
    for (auto& ped : config.pedestrians) {
        ped.speed_min = lo;
        ped.speed_max = hi;
    }
}

}  // namespace vf
