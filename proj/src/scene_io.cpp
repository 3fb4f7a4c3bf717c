#include "vantage/scene_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace vantage::io {

namespace {

using geom::CameraPose;
using geom::Mat3;
using geom::SceneModel;
using geom::Vec3;

void finalize_scene(SceneModel& scene, const SceneOverrides& overrides) {
    if (scene.cameras.size() < 2) {
        throw ParseError("scene '" + scene.object_id + "' has " +
                         std::to_string(scene.cameras.size()) + " cameras, need at least 2");
    }
    std::set<std::string> frame_ids;
    for (const CameraPose& pose : scene.cameras) {
        if (pose.frame_id.empty()) {
            throw ParseError("scene '" + scene.object_id + "' has an empty frame_id");
        }
        if (!frame_ids.insert(pose.frame_id).second) {
            throw ParseError("scene '" + scene.object_id + "' has duplicate frame_id '" +
                             pose.frame_id + "'");
        }
    }
    if (overrides.up_axis) {
        const double n = overrides.up_axis->norm();
        if (n < 1e-12) throw ParseError("up-axis override must be nonzero");
        scene.up_axis = *overrides.up_axis / n;
    } else {
        scene.up_axis = geom::estimate_up_axis(scene.cameras);
    }
    scene.object_center = overrides.object_center
                              ? *overrides.object_center
                              : geom::estimate_object_center(scene.cameras);
}

SceneModel load_colmap_text(const std::filesystem::path& path, const SceneOverrides& overrides) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    SceneModel scene;
    scene.object_id = path.has_parent_path() ? path.parent_path().filename().string()
                                             : path.stem().string();
    if (scene.object_id.empty()) scene.object_id = path.stem().string();
    scene.class_label = path.has_parent_path() && path.parent_path().has_parent_path()
                            ? path.parent_path().parent_path().filename().string()
                            : "unknown";
    if (scene.class_label.empty()) scene.class_label = "unknown";

    std::string line;
    std::size_t line_no = 0;
    bool expect_points_line = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (expect_points_line) {
            // POINTS2D line that follows every image line; content unused.
            expect_points_line = false;
            continue;
        }
        if (line.empty()) continue;
        if (line[0] == '#') continue;

        // IMAGE_ID qw qx qy qz tx ty tz CAMERA_ID NAME
        std::istringstream row(line);
        long image_id;
        double qw, qx, qy, qz, tx, ty, tz;
        long camera_id;
        std::string name;
        if (!(row >> image_id >> qw >> qx >> qy >> qz >> tx >> ty >> tz >> camera_id >> name)) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": truncated or malformed image row");
        }

        const double qnorm = std::sqrt(qw * qw + qx * qx + qy * qy + qz * qz);
        if (qnorm < 1e-12) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": zero quaternion");
        }

        CameraPose pose;
        pose.frame_id = name;
        pose.rotation = quaternion_to_rotation(qw, qx, qy, qz);
        pose.translation = Vec3(tx, ty, tz);
        pose.image_path = name;
        scene.cameras.push_back(std::move(pose));
        expect_points_line = true;
    }

    finalize_scene(scene, overrides);
    return scene;
}

Vec3 parse_vec3(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 3) throw ParseError(what + " must be an array of 3 numbers");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

SceneModel load_scene_json(const std::filesystem::path& path, const SceneOverrides& overrides) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }

    try {
        SceneModel scene;
        scene.object_id = doc.at("object_id").get<std::string>();
        scene.class_label = doc.at("class_label").get<std::string>();

        for (const auto& cam : doc.at("cameras")) {
            CameraPose pose;
            pose.frame_id = cam.at("frame_id").get<std::string>();
            const auto& r = cam.at("rotation");
            if (!r.is_array() || r.size() != 9) {
                throw ParseError("camera '" + pose.frame_id + "': rotation must have 9 entries");
            }
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) pose.rotation(i, j) = r[i * 3 + j].get<double>();
            if (!geom::is_rotation(pose.rotation)) {
                throw ParseError("camera '" + pose.frame_id + "': rotation is not orthonormal");
            }
            pose.translation = parse_vec3(cam.at("translation"), "translation");
            pose.image_path = cam.value("image_path", pose.frame_id);
            if (pose.frame_id.empty()) throw ParseError("empty frame_id");
            scene.cameras.push_back(std::move(pose));
        }

        SceneOverrides merged = overrides;
        if (!merged.up_axis && doc.contains("up_axis")) {
            merged.up_axis = parse_vec3(doc["up_axis"], "up_axis");
        }
        if (!merged.object_center && doc.contains("object_center")) {
            merged.object_center = parse_vec3(doc["object_center"], "object_center");
        }

        finalize_scene(scene, merged);
        return scene;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace

Mat3 quaternion_to_rotation(double w, double x, double y, double z) {
    const double n = std::sqrt(w * w + x * x + y * y + z * z);
    w /= n;
    x /= n;
    y /= n;
    z /= n;
    Mat3 r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
}

SceneModel load_scene(const std::filesystem::path& path,
                      SceneFormat format,
                      const SceneOverrides& overrides) {
    switch (format) {
        case SceneFormat::ColmapText: return load_colmap_text(path, overrides);
        case SceneFormat::SceneJson: return load_scene_json(path, overrides);
    }
    throw ParseError("unknown scene format");
}

SceneModel make_demo_ring(int count) {
    if (count < 3) throw DegenerateGeometry("demo ring needs at least 3 cameras");

    SceneModel scene;
    scene.object_id = "demo-ring-" + std::to_string(count);
    scene.class_label = "synthetic";
    scene.up_axis = Vec3::UnitZ();
    scene.object_center = Vec3::Zero();

    const double two_pi = 6.283185307179586476925286766559;
    for (int i = 0; i < count; ++i) {
        const double phi = two_pi * static_cast<double>(i) / static_cast<double>(count);
        const Vec3 center(std::cos(phi), std::sin(phi), 0.0);
        const Vec3 forward = (scene.object_center - center).normalized();
        const Vec3 down = -scene.up_axis;
        const Vec3 right = down.cross(forward).normalized();

        CameraPose pose;
        char name[32];
        std::snprintf(name, sizeof(name), "cam%04d", i);
        pose.frame_id = name;
        pose.image_path = std::string(name) + ".png";
        pose.rotation.row(0) = right.transpose();
        pose.rotation.row(1) = down.transpose();
        pose.rotation.row(2) = forward.transpose();
        pose.translation = -(pose.rotation * center);
        scene.cameras.push_back(std::move(pose));
    }
    return scene;
}

}  // namespace vantage::io
