#include "vf/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vf {

int pixel_precedence(PixelClass c) {
    switch (c) {
        case PixelClass::background: return 0;
        case PixelClass::road: return 1;
        case PixelClass::boundary: return 2;
        case PixelClass::goal: return 3;
        case PixelClass::forecast_box: return 4;
        case PixelClass::forecast_path: return 4;
        case PixelClass::pedestrian: return 5;
    }
    return 0;
}

ObservationStack push_frame(const ObservationStack& stack, const LabelImage& frame) {
    return {{stack.frames[1], stack.frames[2], frame}};
}

namespace {

void paint(LabelImage& img, int col, int row, PixelClass c) {
    auto& px = img.at(col, row);
    if (pixel_precedence(static_cast<PixelClass>(px)) > pixel_precedence(c)) return;
    px = static_cast<std::uint8_t>(c);
}

void rasterize_rows(LabelImage& img, const WorldState& world, const ScenarioConfig& config,
                    const RenderMode& mode, int row_begin, int row_end) {
    const CameraModel& cam = config.camera;
    const Pose2D& pose = world.agent.pose;
    const bool contour = mode.pedestrian_style == PedestrianStyle::contour;

    for (int row = row_begin; row < row_end; ++row) {
        for (int col = 0; col < LabelImage::width; ++col) {
            PixelClass c = PixelClass::background;
            if (auto ground = pixel_to_ground(cam, pose, col, row)) {
                if (distance(*ground, config.goal) <= config.goal_radius)
                    c = PixelClass::goal;
                else if (point_in_any(*ground, config.boundary_polygons))
                    c = PixelClass::boundary;
                else if (point_in_any(*ground, config.road_polygons))
                    c = PixelClass::road;
            }
            if (contour) {
                for (const auto& ped : world.pedestrians) {
                    if (pixel_hits_cylinder(cam, pose, ped.extent, col, row)) {
                        c = PixelClass::pedestrian;
                        break;
                    }
                }
            }
            img.at(col, row) = static_cast<std::uint8_t>(c);
        }
    }
}

void fill_box(LabelImage& img, const BBox2D& box, PixelClass c) {
    const int c0 = std::max(0, int(std::floor(box.x)));
    const int c1 = std::min(int(LabelImage::width), int(std::floor(box.x + box.w)));
    const int r0 = std::max(0, int(std::floor(box.y)));
    const int r1 = std::min(int(LabelImage::height), int(std::floor(box.y + box.h)));
    for (int row = r0; row < r1; ++row)
        for (int col = c0; col < c1; ++col) paint(img, col, row, c);
}

void paint_box_pedestrians(LabelImage& img, const WorldState& world, const ScenarioConfig& config) {
    // Painter order: farthest first so nearer pedestrians overdraw.
    std::vector<std::pair<double, const PedestrianState*>> order;
    for (const auto& ped : world.pedestrians)
        order.emplace_back(distance(ped.position, world.agent.pose.position), &ped);
    std::sort(order.begin(), order.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [dist, ped] : order) {
        if (auto box = project_cylinder(config.camera, world.agent.pose, ped->extent)) {
            const int c0 = std::max(0, int(std::floor(box->x)));
            const int c1 = std::min(int(LabelImage::width), int(std::floor(box->x + box->w)));
            const int r0 = std::max(0, int(std::floor(box->y)));
            const int r1 = std::min(int(LabelImage::height), int(std::floor(box->y + box->h)));
            for (int row = r0; row < r1; ++row)
                for (int col = c0; col < c1; ++col)
                    img.at(col, row) = static_cast<std::uint8_t>(PixelClass::pedestrian);
        }
    }
}

}  // namespace

LabelImage rasterize_scene(const WorldState& world, const ScenarioConfig& config,
                           const RenderMode& mode) {
    LabelImage img;
#pragma omp parallel for schedule(static)
    for (int row = 0; row < LabelImage::height; ++row)
        rasterize_rows(img, world, config, mode, row, row + 1);
    if (mode.pedestrian_style == PedestrianStyle::box) paint_box_pedestrians(img, world, config);
    return img;
}

LabelImage rasterize_scene_serial(const WorldState& world, const ScenarioConfig& config,
                                  const RenderMode& mode) {
    LabelImage img;
    rasterize_rows(img, world, config, mode, 0, LabelImage::height);
    if (mode.pedestrian_style == PedestrianStyle::box) paint_box_pedestrians(img, world, config);
    return img;
}

void overlay_box_forecast(LabelImage& img, const std::vector<BBox2D>& boxes) {
    for (const auto& box : boxes) fill_box(img, box, PixelClass::forecast_box);
}

std::array<Vec2, 4> ap_quad(const BBox2D& b_t, const BBox2D& b_tk) {
    return {Vec2{b_t.x, b_t.y + b_t.h}, Vec2{b_t.x + b_t.w, b_t.y + b_t.h},
            Vec2{b_tk.x + b_tk.w, b_tk.y + b_tk.h}, Vec2{b_tk.x, b_tk.y + b_tk.h}};
}

namespace {

// Sutherland-Hodgman clip of a polygon against ymin <= y <= ymax.
std::vector<Vec2> clip_strip(const std::vector<Vec2>& poly, double ymin, double ymax) {
    auto clip_half = [](const std::vector<Vec2>& in, double yb, bool keep_below) {
        std::vector<Vec2> out;
        const size_t n = in.size();
        for (size_t i = 0; i < n; ++i) {
            const Vec2& a = in[i];
            const Vec2& b = in[(i + 1) % n];
            const bool ina = keep_below ? a.y <= yb : a.y >= yb;
            const bool inb = keep_below ? b.y <= yb : b.y >= yb;
            if (ina) out.push_back(a);
            if (ina != inb) {
                const double t = (yb - a.y) / (b.y - a.y);
                out.push_back({a.x + t * (b.x - a.x), yb});
            }
        }
        return out;
    };
    auto low = clip_half(poly, ymax, true);
    if (low.empty()) return low;
    return clip_half(low, ymin, false);
}

}  // namespace

void overlay_ap(LabelImage& img, const BBox2D& b_t, const BBox2D& b_tk) {
    const auto quad = ap_quad(b_t, b_tk);
    std::vector<Vec2> poly(quad.begin(), quad.end());

    double min_y = poly[0].y, max_y = poly[0].y;
    for (const auto& v : poly) {
        min_y = std::min(min_y, v.y);
        max_y = std::max(max_y, v.y);
    }
    const int r0 = std::max(0, int(std::floor(min_y)));
    const int r1 = std::min(int(LabelImage::height) - 1, int(std::floor(max_y)));

    const bool single_row = r0 == r1;
    for (int row = r0; row <= r1; ++row) {
        // Row span where the scanline center crosses the quad. End rows the
        // center misses are skipped, except for quads confined to one row
        // (degenerate paths), which paint their strip extent to stay visible.
        const double mid = double(row) + 0.5;
        double min_x = 0.0, max_x = 0.0;
        int hits = 0;
        for (size_t i = 0; i < poly.size(); ++i) {
            const Vec2& a = poly[i];
            const Vec2& b = poly[(i + 1) % poly.size()];
            if ((a.y <= mid) == (b.y <= mid)) continue;
            const double x = a.x + (mid - a.y) / (b.y - a.y) * (b.x - a.x);
            if (hits == 0) { min_x = max_x = x; }
            else {
                min_x = std::min(min_x, x);
                max_x = std::max(max_x, x);
            }
            ++hits;
        }
        if (hits < 2) {
            if (!single_row) continue;
            const auto strip = clip_strip(poly, double(row), double(row + 1));
            if (strip.empty()) continue;
            min_x = max_x = strip[0].x;
            for (const auto& v : strip) {
                min_x = std::min(min_x, v.x);
                max_x = std::max(max_x, v.x);
            }
        }
        int c0 = int(std::floor(min_x));
        int c1 = int(std::floor(max_x));
        if (c1 == c0) c1 = c0 + 1;  // keep degenerate slivers visible
        c0 = std::max(0, c0);
        c1 = std::min(int(LabelImage::width), c1);
        for (int col = c0; col < c1; ++col) paint(img, col, row, PixelClass::forecast_path);
    }
}

const std::array<Rgb, kNumPixelClasses>& class_palette() {
    static const std::array<Rgb, kNumPixelClasses> palette = {{
        {0, 0, 0},        // background
        {128, 128, 128},  // road
        {200, 60, 60},    // boundary
        {60, 200, 60},    // goal
        {60, 60, 220},    // pedestrian
        {230, 220, 60},   // forecast_box
        {60, 220, 220},   // forecast_path
    }};
    return palette;
}

}  // namespace vf
