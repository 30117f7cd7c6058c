#pragma once

#include <optional>
#include <string>

#include "vf/forecast.hpp"
#include "vf/render.hpp"

namespace vf {

// One evaluated configuration: observation style plus forecaster choice.
// No forecaster implies no overlay.
struct ApproachSpec {
    RenderMode mode;
    std::optional<ForecastAlgo> forecaster;
    ForecastSpace space = ForecastSpace::world;

    void validate() const;
    std::string label() const;
};

// Parses "seg", "seg-box", "seg-box+box", "seg+ap" (paper spellings
// "seg(box)" etc. accepted) plus forecaster and space flags.
ApproachSpec make_approach(const std::string& approach_name, const std::string& forecaster_name,
                           const std::string& space_name);

}  // namespace vf
