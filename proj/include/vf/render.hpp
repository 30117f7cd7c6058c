#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vf/forecast.hpp"
#include "vf/scenario.hpp"
#include "vf/world.hpp"

namespace vf {

enum class PixelClass : std::uint8_t {
    background = 0,
    road = 1,
    boundary = 2,
    goal = 3,
    pedestrian = 4,
    forecast_box = 5,
    forecast_path = 6,
};

constexpr int kNumPixelClasses = 7;

// Total draw precedence; higher wins a pixel.
int pixel_precedence(PixelClass c);

// 180x84 class-id raster matching the observation dimensions.
struct LabelImage {
    static constexpr int width = 180;
    static constexpr int height = 84;
    std::array<std::uint8_t, width * height> data{};

    std::uint8_t& at(int col, int row) { return data[row * width + col]; }
    std::uint8_t at(int col, int row) const { return data[row * width + col]; }
    bool operator==(const LabelImage& o) const { return data == o.data; }
};

// Three frames, oldest first. Reset replicates the first frame.
struct ObservationStack {
    std::array<LabelImage, 3> frames;

    static ObservationStack reset(const LabelImage& first) {
        return {{first, first, first}};
    }
};

ObservationStack push_frame(const ObservationStack& stack, const LabelImage& frame);

enum class PedestrianStyle { contour, box };
enum class OverlayKind { none, BOX, AP };

// The four observation configurations: (contour, none) = Seg,
// (box, none) = Seg(box), (box, BOX) and (contour, AP).
struct RenderMode {
    PedestrianStyle pedestrian_style = PedestrianStyle::contour;
    OverlayKind overlay = OverlayKind::none;
};

// Ground polygons, goal disk and pedestrians, painted with per-pixel ray
// classification. Row loop is OpenMP-parallel; rasterize_scene_serial is the
// single-thread reference kept for the equivalence tests and the benchmark.
LabelImage rasterize_scene(const WorldState& world, const ScenarioConfig& config,
                           const RenderMode& mode);
LabelImage rasterize_scene_serial(const WorldState& world, const ScenarioConfig& config,
                                  const RenderMode& mode);

// Fills the forecast boxes (image space) with class forecast_box. Pixels of
// class pedestrian keep precedence. Half-open integer rule: box (x, y, w, h)
// covers columns [floor(x), floor(x+w)) and rows [floor(y), floor(y+h)).
void overlay_box_forecast(LabelImage& img, const std::vector<BBox2D>& boxes);

// Quadrilateral joining the bottom edges of B_t and B_{t+k}, in order
// bottom-left_t, bottom-right_t, bottom-right_{t+k}, bottom-left_{t+k}.
std::array<Vec2, 4> ap_quad(const BBox2D& b_t, const BBox2D& b_tk);

// Scanline-fills the ap_quad area with class forecast_path (clipped, beneath
// pedestrian pixels). Degenerate quads paint their bottom-edge segment.
void overlay_ap(LabelImage& img, const BBox2D& b_t, const BBox2D& b_tk);

struct Rgb {
    std::uint8_t r, g, b;
};

// Fixed visualization palette, one entry per PixelClass.
const std::array<Rgb, kNumPixelClasses>& class_palette();

}  // namespace vf
