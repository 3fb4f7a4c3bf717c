#include "vantage/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace vantage::geom {

namespace {

constexpr double kRadToDeg = 57.29577951308232087679815481410517;
constexpr double kHorizontalEps = 1e-9;

Vec3 horizontal(const Vec3& v, const Vec3& up) { return v - v.dot(up) * up; }

LateralDirection classify(double angle_deg, double tol_deg) {
    if (angle_deg > tol_deg) return LateralDirection::Right;
    if (angle_deg < -tol_deg) return LateralDirection::Left;
    return LateralDirection::Degenerate;
}

}  // namespace

const char* to_string(LateralDirection d) {
    switch (d) {
        case LateralDirection::Left: return "left";
        case LateralDirection::Right: return "right";
        case LateralDirection::Degenerate: return "degenerate";
    }
    return "degenerate";
}

LateralDirection flipped(LateralDirection d) {
    switch (d) {
        case LateralDirection::Left: return LateralDirection::Right;
        case LateralDirection::Right: return LateralDirection::Left;
        case LateralDirection::Degenerate: return LateralDirection::Degenerate;
    }
    return LateralDirection::Degenerate;
}

bool is_rotation(const Mat3& r, double tol) {
    if (!r.allFinite()) return false;
    const Mat3 gram = r.transpose() * r;
    if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
    return std::abs(r.determinant() - 1.0) <= tol;
}

Vec3 camera_center(const CameraPose& pose) {
    return -(pose.rotation.transpose() * pose.translation);
}

Vec3 forward_axis(const CameraPose& pose) {
    return pose.rotation.transpose() * Vec3::UnitZ();
}

Vec3 estimate_up_axis(std::span<const CameraPose> cameras) {
    if (cameras.size() < 3) {
        throw DegenerateGeometry("up-axis estimation needs at least 3 cameras, got " +
                                 std::to_string(cameras.size()));
    }

    Vec3 mean = Vec3::Zero();
    std::vector<Vec3> centers;
    centers.reserve(cameras.size());
    for (const CameraPose& pose : cameras) {
        centers.push_back(camera_center(pose));
        mean += centers.back();
    }
    mean /= static_cast<double>(centers.size());

    Mat3 cov = Mat3::Zero();
    for (const Vec3& c : centers) {
        const Vec3 d = c - mean;
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(centers.size());

    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    const Vec3 evals = eig.eigenvalues();  // ascending
    if (evals[2] <= 0.0 || evals[1] / evals[2] < 1e-9) {
        throw DegenerateGeometry("camera centers are collinear; ring plane undefined");
    }

    Vec3 normal = eig.eigenvectors().col(0).normalized();

    // Camera +y points down, so the mean of -R^T*(0,1,0) points up.
    Vec3 mean_up = Vec3::Zero();
    for (const CameraPose& pose : cameras) {
        mean_up -= pose.rotation.transpose() * Vec3::UnitY();
    }
    if (normal.dot(mean_up) < 0.0) normal = -normal;
    return normal;
}

Vec3 estimate_object_center(std::span<const CameraPose> cameras) {
    if (cameras.size() < 2) {
        throw DegenerateGeometry("object-center estimation needs at least 2 cameras, got " +
                                 std::to_string(cameras.size()));
    }

    Mat3 lhs = Mat3::Zero();
    Vec3 rhs = Vec3::Zero();
    for (const CameraPose& pose : cameras) {
        const Vec3 d = forward_axis(pose);
        const Mat3 proj = Mat3::Identity() - d * d.transpose();
        lhs += proj;
        rhs += proj * camera_center(pose);
    }

    Eigen::SelfAdjointEigenSolver<Mat3> eig(lhs);
    const Vec3 evals = eig.eigenvalues();
    if (evals[2] <= 0.0) {
        throw DegenerateGeometry("optical axes give an empty system");
    }
    if (evals[0] > evals[2] * 1e-12) {
        return lhs.ldlt().solve(rhs);
    }

    // Singular system: the axes share a direction, so no unique least-squares
    // point exists. Take the minimum-norm solution and accept it only when
    // the axes are actually concurrent (two cameras facing each other along
    // one line); offset parallel axes stay an error.
    Vec3 x = Vec3::Zero();
    for (int k = 0; k < 3; ++k) {
        if (evals[k] > evals[2] * 1e-12) {
            const Vec3 v = eig.eigenvectors().col(k);
            x += v * (v.dot(rhs) / evals[k]);
        }
    }
    double scale = 1.0;
    for (const CameraPose& pose : cameras) {
        scale = std::max(scale, (camera_center(pose) - x).norm());
    }
    for (const CameraPose& pose : cameras) {
        const Vec3 d = forward_axis(pose);
        const Vec3 offset = x - camera_center(pose);
        const Vec3 miss = offset - d * d.dot(offset);
        if (miss.norm() > 1e-6 * scale) {
            throw DegenerateGeometry("optical axes are parallel; ray intersection undefined");
        }
    }
    return x;
}

RelativeViewpoint relative_viewpoint(const CameraPose& pose1,
                                     const CameraPose& pose2,
                                     const SceneModel& scene,
                                     double lateral_tol_deg) {
    const Vec3 up = scene.up_axis.normalized();
    const Vec3 center = scene.object_center;

    const Vec3 c1 = camera_center(pose1);
    const Vec3 c2 = camera_center(pose2);

    const Vec3 v1 = horizontal(c1 - center, up);
    const Vec3 v2 = horizontal(c2 - center, up);
    if (v1.norm() < kHorizontalEps || v2.norm() < kHorizontalEps) {
        throw DegenerateGeometry("camera directly above object center; horizontal direction undefined");
    }

    RelativeViewpoint out;
    out.separation_deg = std::atan2(v1.cross(v2).norm(), v1.dot(v2)) * kRadToDeg;

    // Yaw of the second camera's facing relative to the first, about the up
    // axis. Positive = turned to its own right (clockwise from above).
    const Vec3 f1h = horizontal(forward_axis(pose1), up);
    const Vec3 f2h = horizontal(forward_axis(pose2), up);
    if (f1h.norm() < kHorizontalEps || f2h.norm() < kHorizontalEps) {
        throw DegenerateGeometry("camera forward axis is vertical; yaw undefined");
    }
    const Vec3 a = f1h.normalized();
    const Vec3 b = f2h.normalized();
    out.yaw_deg = -std::atan2(a.cross(b).dot(up), a.dot(b)) * kRadToDeg;

    // Ego lateral: displacement of camera 2 expressed in camera 1's frame.
    const Vec3 in_cam1 = pose1.rotation * (c2 - c1);
    const double disp_norm = in_cam1.norm();
    if (disp_norm < 1e-12) {
        out.ego_lateral = LateralDirection::Degenerate;
    } else {
        const double s = std::clamp(in_cam1.x() / disp_norm, -1.0, 1.0);
        out.ego_lateral = classify(std::asin(s) * kRadToDeg, lateral_tol_deg);
    }

    // Object lateral: frame anchored at the object center facing camera 1.
    const Vec3 obj_forward = v1.normalized();
    const Vec3 obj_right = obj_forward.cross(up);
    const Vec3 disp_h = horizontal(c2 - c1, up);
    const double disp_h_norm = disp_h.norm();
    if (disp_h_norm < 1e-12) {
        out.object_lateral = LateralDirection::Degenerate;
    } else {
        const double s = std::clamp(disp_h.dot(obj_right) / disp_h_norm, -1.0, 1.0);
        out.object_lateral = classify(std::asin(s) * kRadToDeg, lateral_tol_deg);
    }

    return out;
}

}  // namespace vantage::geom
