#pragma once

#include <string>

#include "vf/render.hpp"

namespace vf {

// Writes the class raster as an 8-bit paletted PNG using class_palette().
// Deterministic byte-for-byte for identical images. Throws IoError on failure.
void write_label_png(const std::string& path, const LabelImage& img);

}  // namespace vf
