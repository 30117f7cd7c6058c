#include <doctest.h>

#include "vf/scenario.hpp"

using namespace vf;

TEST_CASE("scenario JSON round-trip preserves the config") {
    const ScenarioConfig c = make_s_turn();
    const std::string text = scenario_to_json(c);
    const ScenarioConfig back = scenario_from_json(text);
    CHECK(back.name == c.name);
    CHECK(back.road_polygons.size() == c.road_polygons.size());
    CHECK(back.pedestrians.size() == c.pedestrians.size());
    CHECK(back.agent_start.position == c.agent_start.position);
    CHECK(back.goal == c.goal);
    CHECK(back.dt == c.dt);
    CHECK(back.agent_speed == c.agent_speed);
    CHECK(back.turn_accel == c.turn_accel);
    CHECK(back.steering_gain == c.steering_gain);
    CHECK(back.forecast_horizon == c.forecast_horizon);
    CHECK(back.forecast_stride == c.forecast_stride);
    // Serialization is stable.
    CHECK(scenario_to_json(back) == text);
}

TEST_CASE("scenario JSON is strict") {
    const std::string base = scenario_to_json(make_s_turn());

    SUBCASE("missing schema_version is rejected") {
        std::string text = base;
        const auto pos = text.find("\"schema_version\": 1,");
        text.erase(pos, std::string("\"schema_version\": 1,").size());
        CHECK_THROWS_AS(scenario_from_json(text), ConfigError);
    }
    SUBCASE("unknown fields are rejected") {
        std::string text = base;
        text.insert(text.find("\"name\""), "\"mystery\": 3,\n  ");
        CHECK_THROWS_AS(scenario_from_json(text), ConfigError);
    }
    SUBCASE("wrong schema version is rejected") {
        std::string text = base;
        const auto pos = text.find("\"schema_version\": 1");
        text.replace(pos, std::string("\"schema_version\": 1").size(), "\"schema_version\": 2");
        CHECK_THROWS_AS(scenario_from_json(text), ConfigError);
    }
    SUBCASE("parse errors are ConfigError") {
        CHECK_THROWS_AS(scenario_from_json("{nope"), ConfigError);
    }
}

TEST_CASE("config validation catches bad setups") {
    SUBCASE("goal off the road") {
        ScenarioConfig c = make_s_turn();
        c.goal = {500.0, 500.0};
        CHECK_THROWS_AS(c.validate(), ConfigError);
    }
    SUBCASE("pedestrian overlapping the agent start") {
        ScenarioConfig c = make_s_turn();
        PedestrianSpec ped;
        ped.waypoints = {c.agent_start.position, c.agent_start.position + Vec2{5, 0}};
        c.pedestrians.push_back(ped);
        CHECK_THROWS_AS(c.validate(), ConfigError);
    }
    SUBCASE("inverted speed range") {
        ScenarioConfig c = make_s_turn();
        c.pedestrians[0].speed_min = 2.0;
        c.pedestrians[0].speed_max = 1.0;
        CHECK_THROWS_AS(c.validate(), ConfigError);
    }
    SUBCASE("non-positive dt") {
        ScenarioConfig c = make_s_turn();
        c.dt = 0.0;
        CHECK_THROWS_AS(c.validate(), ConfigError);
    }
}

TEST_CASE("presets are valid and the route split matches the plan") {
    CHECK_NOTHROW(make_s_turn().validate());
    const RouteSets sets = urban_grid_routes();
    CHECK(sets.seen.size() == 12);
    CHECK(sets.unseen.size() == 4);
    for (const auto& route : sets.seen) CHECK_NOTHROW(make_urban_grid(route).validate());
    for (const auto& route : sets.unseen) CHECK_NOTHROW(make_urban_grid(route).validate());
}

TEST_CASE("resolve_scenario handles presets and route specs") {
    CHECK(resolve_scenario("s-turn").name == "s-turn");
    CHECK(resolve_scenario("urban-grid").name == "urban-grid");
    CHECK_NOTHROW(resolve_scenario("urban-grid:seen:3"));
    CHECK_NOTHROW(resolve_scenario("urban-grid:unseen:0"));
    CHECK_THROWS_AS(resolve_scenario("urban-grid:seen:99"), ConfigError);
    CHECK_THROWS_AS(resolve_scenario("no-such-scenario"), ConfigError);
}

TEST_CASE("apply_speed_band overrides all pedestrian ranges") {
    ScenarioConfig c = make_s_turn();
    apply_speed_band(c, 0.3, 0.6);
    for (const auto& ped : c.pedestrians) {
        CHECK(ped.speed_min == 0.3);
        CHECK(ped.speed_max == 0.6);
    }
    CHECK_THROWS_AS(apply_speed_band(c, 1.0, 0.5), ConfigError);
}
