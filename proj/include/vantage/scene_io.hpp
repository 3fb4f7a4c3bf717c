#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "vantage/geometry.hpp"

namespace vantage::io {

enum class SceneFormat { ColmapText, SceneJson };

/// Values that bypass the up-axis / object-center estimators.
struct SceneOverrides {
    std::optional<geom::Vec3> up_axis;
    std::optional<geom::Vec3> object_center;
};

/// Hamilton convention, scalar-first; the quaternion is normalized first.
geom::Mat3 quaternion_to_rotation(double w, double x, double y, double z);

/// Load one scene from a COLMAP images.txt or a scene JSON file. The camera
/// list preserves file order; up_axis and object_center come from overrides
/// (CLI or JSON fields) or from the estimators.
/// Throws ParseError on malformed input and DegenerateGeometry when the
/// estimators fail.
geom::SceneModel load_scene(const std::filesystem::path& path,
                            SceneFormat format,
                            const SceneOverrides& overrides = {});

/// Synthetic fixture: `count` cameras evenly spaced on a horizontal unit
/// circle around the origin, all facing the object center, up = +z.
geom::SceneModel make_demo_ring(int count);

}  // namespace vantage::io
