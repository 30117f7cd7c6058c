#include <doctest.h>

#include <random>
#include <set>

#include "vf/render.hpp"
#include "vf/rng.hpp"

using namespace vf;

namespace {

ScenarioConfig straight_road() {
    ScenarioConfig c;
    c.name = "render-test";
    c.road_polygons = {{{-5, -5}, {60, -5}, {60, 5}, {-5, 5}}};
    c.boundary_polygons = {{{-5, 5}, {60, 5}, {60, 8}, {-5, 8}}};
    c.agent_start = Pose2D({0, 0}, 0.0);
    c.goal = {50, 0};
    return c;
}

PedestrianSpec ped_at(Vec2 pos) {
    PedestrianSpec spec;
    spec.waypoints = {pos, pos + Vec2{0, 1}};
    spec.speed_min = spec.speed_max = 0.0;
    return spec;
}

std::set<int> class_set(const LabelImage& img) {
    std::set<int> out;
    for (auto v : img.data) out.insert(int(v));
    return out;
}

}  // namespace

TEST_CASE("rasterize_scene ground classes") {
    ScenarioConfig c = straight_road();
    c.goal = {-4, 0};  // on-road but behind the camera

    const WorldState w = sample_scenario(c, 1);
    const LabelImage img = rasterize_scene(w, c, {PedestrianStyle::contour, OverlayKind::none});
    const auto classes = class_set(img);
    CHECK(classes.count(int(PixelClass::road)) == 1);
    CHECK(classes.count(int(PixelClass::background)) == 1);
    CHECK(classes.count(int(PixelClass::pedestrian)) == 0);
    CHECK(classes.count(int(PixelClass::goal)) == 0);
}

TEST_CASE("box style fills exactly the projected cylinder box") {
    ScenarioConfig c = straight_road();
    c.goal = {-4, 0};
    c.pedestrians = {ped_at({8, 0})};
    const WorldState w = sample_scenario(c, 1);
    const LabelImage img = rasterize_scene(w, c, {PedestrianStyle::box, OverlayKind::none});

    const auto box = project_cylinder(c.camera, w.agent.pose, w.pedestrians[0].extent);
    REQUIRE(box);
    const int c0 = std::max(0, int(std::floor(box->x)));
    const int c1 = std::min(int(LabelImage::width), int(std::floor(box->x + box->w)));
    const int r0 = std::max(0, int(std::floor(box->y)));
    const int r1 = std::min(int(LabelImage::height), int(std::floor(box->y + box->h)));
    for (int row = 0; row < LabelImage::height; ++row) {
        for (int col = 0; col < LabelImage::width; ++col) {
            const bool inside = col >= c0 && col < c1 && row >= r0 && row < r1;
            CHECK((img.at(col, row) == std::uint8_t(PixelClass::pedestrian)) == inside);
        }
    }
}

TEST_CASE("overlapping pedestrians cover the union of their boxes (painter order)") {
    ScenarioConfig c = straight_road();
    c.goal = {-4, 0};
    c.pedestrians = {ped_at({4, 0.2}), ped_at({8, 0.4})};
    const WorldState w = sample_scenario(c, 1);
    const LabelImage img = rasterize_scene(w, c, {PedestrianStyle::box, OverlayKind::none});

    // Oracle: rasterize each pedestrian alone and union the pixel sets.
    std::set<std::pair<int, int>> expected;
    for (size_t i = 0; i < c.pedestrians.size(); ++i) {
        ScenarioConfig solo = c;
        solo.pedestrians = {c.pedestrians[i]};
        const WorldState ws = sample_scenario(solo, 1);
        const LabelImage alone = rasterize_scene(ws, solo, {PedestrianStyle::box, OverlayKind::none});
        for (int row = 0; row < LabelImage::height; ++row)
            for (int col = 0; col < LabelImage::width; ++col)
                if (alone.at(col, row) == std::uint8_t(PixelClass::pedestrian))
                    expected.insert({col, row});
    }
    REQUIRE_FALSE(expected.empty());
    for (int row = 0; row < LabelImage::height; ++row)
        for (int col = 0; col < LabelImage::width; ++col)
            CHECK((img.at(col, row) == std::uint8_t(PixelClass::pedestrian)) ==
                  (expected.count({col, row}) == 1));
}

TEST_CASE("overlay_box_forecast") {
    LabelImage img;  // all background

    SUBCASE("no boxes leaves the image unchanged") {
        LabelImage copy = img;
        overlay_box_forecast(copy, {});
        CHECK(copy == img);
    }
    SUBCASE("fully outside boxes are clipped away") {
        LabelImage copy = img;
        overlay_box_forecast(copy, {{200.0, 10.0, 5.0, 5.0}, {-30.0, -30.0, 5.0, 5.0}});
        CHECK(copy == img);
    }
    SUBCASE("half-open integer rasterization") {
        overlay_box_forecast(img, {{10.0, 20.0, 4.0, 6.0}});
        for (int row = 0; row < LabelImage::height; ++row)
            for (int col = 0; col < LabelImage::width; ++col) {
                const bool inside = col >= 10 && col < 14 && row >= 20 && row < 26;
                CHECK((img.at(col, row) == std::uint8_t(PixelClass::forecast_box)) == inside);
            }
    }
    SUBCASE("pedestrian pixels keep precedence") {
        img.at(11, 21) = std::uint8_t(PixelClass::pedestrian);
        overlay_box_forecast(img, {{10.0, 20.0, 4.0, 6.0}});
        CHECK(img.at(11, 21) == std::uint8_t(PixelClass::pedestrian));
        CHECK(img.at(10, 20) == std::uint8_t(PixelClass::forecast_box));
    }
}

TEST_CASE("ap_quad vertex formula") {
    const auto quad = ap_quad({10, 20, 4, 6}, {30, 40, 4, 6});
    CHECK(quad[0] == Vec2{10, 26});
    CHECK(quad[1] == Vec2{14, 26});
    CHECK(quad[2] == Vec2{34, 46});
    CHECK(quad[3] == Vec2{30, 46});
}

TEST_CASE("overlay_ap degenerate quad paints the bottom edge segment") {
    LabelImage img;
    const BBox2D b{10, 20, 4, 6};
    overlay_ap(img, b, b);
    int painted = 0;
    for (int col = 0; col < LabelImage::width; ++col)
        if (img.at(col, 26) == std::uint8_t(PixelClass::forecast_path)) ++painted;
    CHECK(painted == 4);  // columns 10..13
    for (int row = 0; row < LabelImage::height; ++row) {
        if (row == 26) continue;
        for (int col = 0; col < LabelImage::width; ++col)
            CHECK(img.at(col, row) == std::uint8_t(PixelClass::background));
    }
}

TEST_CASE("overlay_ap pixel area matches the shoelace oracle (100 random pairs)") {
    // Box scales follow projected pedestrian sizes (a few px up to ~12 px
    // wide) with the forecast receding upward in the image.
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 100; ++trial) {
        BBox2D bt{uniform_double(rng, 20, 150), uniform_double(rng, 32, 60),
                  uniform_double(rng, 3, 12), uniform_double(rng, 4, 18)};
        BBox2D btk{bt.x + uniform_double(rng, -12, 12), bt.y + uniform_double(rng, -30, -10),
                   bt.w * uniform_double(rng, 0.5, 1.0), bt.h * uniform_double(rng, 0.5, 1.0)};

        LabelImage img;
        overlay_ap(img, bt, btk);
        long painted = 0;
        double min_y = 1e9, max_y = -1e9;
        const auto quad = ap_quad(bt, btk);
        for (const auto& v : quad) {
            min_y = std::min(min_y, v.y);
            max_y = std::max(max_y, v.y);
        }
        for (auto v : img.data)
            if (v == std::uint8_t(PixelClass::forecast_path)) ++painted;

        // Shoelace area of the quad.
        double area = 0.0;
        for (size_t i = 0; i < 4; ++i) {
            const Vec2& a = quad[i];
            const Vec2& b = quad[(i + 1) % 4];
            area += a.x * b.y - b.x * a.y;
        }
        area = std::abs(area) / 2.0;

        const long rows_touched = long(std::floor(max_y)) - long(std::floor(min_y)) + 1;
        CHECK(std::abs(double(painted) - area) <= 2.0 * double(rows_touched));
    }
}

TEST_CASE("push_frame and reset") {
    LabelImage a, b, c, d;
    a.data.fill(1);
    b.data.fill(2);
    c.data.fill(3);
    d.data.fill(4);

    ObservationStack stack = ObservationStack::reset(a);
    CHECK(stack.frames[0] == a);
    CHECK(stack.frames[1] == a);
    CHECK(stack.frames[2] == a);

    stack = push_frame(stack, b);
    stack = push_frame(stack, c);
    stack = push_frame(stack, d);
    CHECK(stack.frames[0] == b);
    CHECK(stack.frames[1] == c);
    CHECK(stack.frames[2] == d);
}

TEST_CASE("pixel class precedence holds against a reference repaint") {
    ScenarioConfig c = straight_road();
    c.goal = {14, 0};  // visible goal disk
    c.pedestrians = {ped_at({8, 0}), ped_at({12, -1})};
    const WorldState w = sample_scenario(c, 1);

    for (const auto style : {PedestrianStyle::contour, PedestrianStyle::box}) {
        const RenderMode mode{style, OverlayKind::none};
        LabelImage img = rasterize_scene(w, c, mode);

        // Overlay a synthetic forecast box region to include those classes.
        overlay_box_forecast(img, {{60.0, 40.0, 30.0, 20.0}});

        // Reference repaint: rank every claim per pixel by precedence.
        for (int row = 0; row < LabelImage::height; ++row) {
            for (int col = 0; col < LabelImage::width; ++col) {
                int best = int(PixelClass::background);
                auto claim = [&](PixelClass cls) {
                    if (pixel_precedence(cls) >= pixel_precedence(PixelClass(best))) best = int(cls);
                };
                if (auto g = pixel_to_ground(c.camera, w.agent.pose, col, row)) {
                    if (point_in_any(*g, c.road_polygons)) claim(PixelClass::road);
                    if (point_in_any(*g, c.boundary_polygons)) claim(PixelClass::boundary);
                    if (distance(*g, c.goal) <= c.goal_radius) claim(PixelClass::goal);
                }
                if (col >= 60 && col < 90 && row >= 40 && row < 60) claim(PixelClass::forecast_box);
                for (const auto& ped : w.pedestrians) {
                    if (style == PedestrianStyle::contour) {
                        if (pixel_hits_cylinder(c.camera, w.agent.pose, ped.extent, col, row))
                            claim(PixelClass::pedestrian);
                    } else if (auto box = project_cylinder(c.camera, w.agent.pose, ped.extent)) {
                        if (col >= std::floor(box->x) && col < std::floor(box->x + box->w) &&
                            row >= std::floor(box->y) && row < std::floor(box->y + box->h))
                            claim(PixelClass::pedestrian);
                    }
                }
                CHECK(int(img.at(col, row)) == best);
            }
        }
    }
}

TEST_CASE("overlays never touch pixels outside their geometry") {
    ScenarioConfig c = straight_road();
    c.pedestrians = {ped_at({10, 1})};
    const WorldState w = sample_scenario(c, 1);
    const RenderMode mode{PedestrianStyle::contour, OverlayKind::none};
    const LabelImage base = rasterize_scene(w, c, mode);

    LabelImage with_box = base;
    overlay_box_forecast(with_box, {{20.0, 30.0, 10.0, 8.0}});
    for (int row = 0; row < LabelImage::height; ++row)
        for (int col = 0; col < LabelImage::width; ++col) {
            const bool in_geom = col >= 20 && col < 30 && row >= 30 && row < 38;
            if (!in_geom) CHECK(with_box.at(col, row) == base.at(col, row));
        }
}

TEST_CASE("contour and box styles differ only in pedestrian pixels") {
    ScenarioConfig c = straight_road();
    c.goal = {20, 2};
    c.pedestrians = {ped_at({7, 0}), ped_at({11, 2})};
    const WorldState w = sample_scenario(c, 1);
    const LabelImage seg = rasterize_scene(w, c, {PedestrianStyle::contour, OverlayKind::none});
    const LabelImage seg_box = rasterize_scene(w, c, {PedestrianStyle::box, OverlayKind::none});
    for (int row = 0; row < LabelImage::height; ++row)
        for (int col = 0; col < LabelImage::width; ++col) {
            if (seg.at(col, row) == seg_box.at(col, row)) continue;
            const bool ped_involved =
                seg.at(col, row) == std::uint8_t(PixelClass::pedestrian) ||
                seg_box.at(col, row) == std::uint8_t(PixelClass::pedestrian);
            CHECK(ped_involved);
        }
}

TEST_CASE("rendering is deterministic and the parallel kernel matches the serial reference") {
    ScenarioConfig c = straight_road();
    c.goal = {30, 1};
    c.pedestrians = {ped_at({6, -1}), ped_at({9, 1}), ped_at({14, 0})};
    const WorldState w = sample_scenario(c, 2);
    for (const auto style : {PedestrianStyle::contour, PedestrianStyle::box}) {
        const RenderMode mode{style, OverlayKind::none};
        const LabelImage a = rasterize_scene(w, c, mode);
        const LabelImage b = rasterize_scene(w, c, mode);
        const LabelImage s = rasterize_scene_serial(w, c, mode);
        CHECK(a == b);
        CHECK(a == s);
    }
}
