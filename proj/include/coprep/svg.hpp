#pragma once

#include <string>
#include <vector>

#include "coprep/scene.hpp"
#include "coprep/scene_data.hpp"

namespace coprep {

// Scene overlay: regions as translucent circles, keypoint frames as
// triangles colored by group, vanishing lines clipped to the frame. The
// viewport is the bounding box of the drawn geometry.
std::string render_scene_svg(const SceneData& data, const JointLabeling& y, const SceneParams& params);

// Step plot of fraction-below-threshold values on a fixed-size canvas.
std::string render_cdf_svg(const std::vector<double>& thresholds, const std::vector<double>& fractions);

}  // namespace coprep
