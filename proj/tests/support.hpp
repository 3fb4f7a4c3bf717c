#pragma once

// Test-only helpers: independent oracles and fixture builders. Nothing here
// may call the code paths it is used to check.

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "vantage/geometry.hpp"
#include "vantage/rng.hpp"

namespace testkit {

using vantage::geom::CameraPose;
using vantage::geom::LateralDirection;
using vantage::geom::Mat3;
using vantage::geom::SceneModel;
using vantage::geom::Vec3;

constexpr double kPi = 3.14159265358979323846264338327950288;

inline double deg2rad(double d) { return d * kPi / 180.0; }

// --- quaternion oracle -----------------------------------------------------
// Hamilton product route: rotate v by q * (0,v) * conj(q). Used as the
// independent check for the loader's quaternion-to-matrix conversion and as
// a generator of valid random rotations.

struct Quat {
    double w, x, y, z;
};

inline Quat quat_mul(const Quat& a, const Quat& b) {
    return Quat{
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    };
}

inline Vec3 quat_rotate(const Quat& q, const Vec3& v) {
    const Quat conj{q.w, -q.x, -q.y, -q.z};
    const Quat p{0.0, v.x(), v.y(), v.z()};
    const Quat r = quat_mul(quat_mul(q, p), conj);
    return Vec3(r.x, r.y, r.z);
}

inline Mat3 rotation_from_quat_oracle(const Quat& q_in) {
    const double n = std::sqrt(q_in.w * q_in.w + q_in.x * q_in.x + q_in.y * q_in.y + q_in.z * q_in.z);
    const Quat q{q_in.w / n, q_in.x / n, q_in.y / n, q_in.z / n};
    Mat3 r;
    r.col(0) = quat_rotate(q, Vec3::UnitX());
    r.col(1) = quat_rotate(q, Vec3::UnitY());
    r.col(2) = quat_rotate(q, Vec3::UnitZ());
    return r;
}

inline Quat random_unit_quat(vantage::Rng& rng) {
    Quat q{rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian()};
    const double n = std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z);
    return Quat{q.w / n, q.x / n, q.y / n, q.z / n};
}

inline Mat3 random_rotation(vantage::Rng& rng) {
    return rotation_from_quat_oracle(random_unit_quat(rng));
}

inline Mat3 axis_angle(const Vec3& axis, double angle_rad) {
    const Vec3 a = axis.normalized();
    const double h = angle_rad / 2.0;
    return rotation_from_quat_oracle(
        Quat{std::cos(h), a.x() * std::sin(h), a.y() * std::sin(h), a.z() * std::sin(h)});
}

// --- orbit fixtures ----------------------------------------------------------
// Cameras on a circle of radius r around `center`, ring plane spanned by the
// rotated x/y axes, all facing the center, camera "down" = -up.

inline CameraPose orbit_camera(double phi_rad,
                               double radius,
                               const Vec3& center,
                               const Mat3& ring_orientation,
                               const std::string& frame_id) {
    const Vec3 up = ring_orientation * Vec3::UnitZ();
    const Vec3 radial = ring_orientation * Vec3(std::cos(phi_rad), std::sin(phi_rad), 0.0);
    const Vec3 position = center + radius * radial;
    const Vec3 forward = (center - position).normalized();
    const Vec3 down = -up;
    const Vec3 right = down.cross(forward).normalized();

    CameraPose pose;
    pose.frame_id = frame_id;
    pose.image_path = frame_id + ".png";
    pose.rotation.row(0) = right.transpose();
    pose.rotation.row(1) = down.transpose();
    pose.rotation.row(2) = forward.transpose();
    pose.translation = -(pose.rotation * position);
    return pose;
}

inline SceneModel orbit_scene(const std::vector<double>& phis_rad,
                              double radius = 1.0,
                              const Vec3& center = Vec3::Zero(),
                              const Mat3& ring_orientation = Mat3::Identity()) {
    SceneModel scene;
    scene.object_id = "orbit";
    scene.class_label = "synthetic";
    scene.up_axis = ring_orientation * Vec3::UnitZ();
    scene.object_center = center;
    int i = 0;
    for (double phi : phis_rad) {
        scene.cameras.push_back(orbit_camera(phi, radius, center, ring_orientation,
                                             "orbit" + std::to_string(i++)));
    }
    return scene;
}

// Closed-form labels for an orbit pair separated by delta_phi (signed,
// counterclockwise from above, in degrees, |delta_phi| < 180): the second
// camera keeps facing the center, so it turns by -delta_phi about its own
// vertical axis, the displacement is to the first camera's right for
// positive delta_phi, and the object-frame label is the negation.
struct OrbitTruth {
    LateralDirection ego;
    LateralDirection object;
    double yaw_deg;
    double separation_deg;
};

inline OrbitTruth orbit_truth(double delta_phi_deg) {
    OrbitTruth t{};
    t.separation_deg = std::abs(delta_phi_deg);
    t.yaw_deg = -delta_phi_deg;
    if (delta_phi_deg > 0.0) {
        t.ego = LateralDirection::Right;
        t.object = LateralDirection::Left;
    } else if (delta_phi_deg < 0.0) {
        t.ego = LateralDirection::Left;
        t.object = LateralDirection::Right;
    } else {
        t.ego = LateralDirection::Degenerate;
        t.object = LateralDirection::Degenerate;
    }
    return t;
}

// --- misc --------------------------------------------------------------------

inline std::size_t count_substring(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        ++n;
        pos += needle.size();
    }
    return n;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("vantage_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::string out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return out;
}

inline void spit(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

}  // namespace testkit
