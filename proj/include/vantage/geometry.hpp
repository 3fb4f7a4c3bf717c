#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vantage/errors.hpp"

namespace vantage::geom {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kDefaultLateralTolDeg = 1.0;

enum class LateralDirection { Left, Right, Degenerate };

const char* to_string(LateralDirection d);
LateralDirection flipped(LateralDirection d);

/// World-to-camera rigid transform: x_cam = rotation * x_world + translation.
/// Camera frame convention: +x right, +y down, +z forward (COLMAP).
struct CameraPose {
    std::string frame_id;
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();
    std::string image_path;  // carried through to generated records
};

struct SceneModel {
    std::string object_id;
    std::string class_label;
    std::vector<CameraPose> cameras;
    Vec3 up_axis = Vec3::UnitZ();
    Vec3 object_center = Vec3::Zero();
};

/// Ground-truth relative viewpoint for an ordered camera pair (first, second).
///
/// yaw_deg is positive when the second camera's facing is rotated to its own
/// right, i.e. clockwise viewed from above with up_axis toward the viewer.
/// separation_deg is the unsigned horizontal angle at the object center
/// between the two camera directions, in [0, 180].
struct RelativeViewpoint {
    LateralDirection ego_lateral = LateralDirection::Degenerate;
    LateralDirection object_lateral = LateralDirection::Degenerate;
    double yaw_deg = 0.0;
    double separation_deg = 0.0;
};

/// True when r is orthonormal with determinant +1, both within tol.
bool is_rotation(const Mat3& r, double tol = 1e-6);

/// World-space optical center C with R*C + t = 0.
Vec3 camera_center(const CameraPose& pose);

/// Unit world-space viewing direction, R^T * (0,0,1).
Vec3 forward_axis(const CameraPose& pose);

/// Unit normal of the least-squares plane through the camera centers
/// (smallest-eigenvalue direction of the centered covariance), oriented so
/// it agrees with the average camera "up" (-y of the camera frame).
/// Throws DegenerateGeometry when the centers are collinear.
Vec3 estimate_up_axis(std::span<const CameraPose> cameras);

/// Point minimizing the sum of squared distances to all optical axes,
/// solved from the normal equations of the ray-projection objective.
/// Throws DegenerateGeometry when the system is singular (parallel axes).
Vec3 estimate_object_center(std::span<const CameraPose> cameras);

/// Relative viewpoint labels for the ordered pair (pose1, pose2) using the
/// scene's up axis and object center. lateral_tol_deg is the dead zone (in
/// degrees of lateral displacement) below which a direction is Degenerate.
/// Throws DegenerateGeometry when a horizontal projection vanishes (camera
/// directly above the object, or a vertical forward axis).
RelativeViewpoint relative_viewpoint(const CameraPose& pose1,
                                     const CameraPose& pose2,
                                     const SceneModel& scene,
                                     double lateral_tol_deg = kDefaultLateralTolDeg);

}  // namespace vantage::geom
