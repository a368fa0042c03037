#include "facesynth/geometry/camera.hpp"

#include "facesynth/error.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace facesynth::geometry {

double ImageSize::diagonal() const noexcept
{
    return std::hypot(static_cast<double>(width), static_cast<double>(height));
}

Intrinsics Intrinsics::centered(double focal, ImageSize size)
{
    Intrinsics k;
    k.focal = focal;
    k.image_size = size;
    k.principal_point = {(size.width - 1) / 2.0, (size.height - 1) / 2.0};
    k.validate();
    return k;
}

void Intrinsics::validate() const
{
    if (!(focal > 0.0) || !std::isfinite(focal)) {
        throw Error(ErrorCode::invalid_input, "focal length must be positive");
    }
    if (image_size.width <= 0 || image_size.height <= 0) {
        throw Error(ErrorCode::invalid_input, "image size must be positive");
    }
    const auto& pp = principal_point;
    if (!(pp.x() >= 0.0 && pp.y() >= 0.0 && pp.x() <= image_size.width - 1 && pp.y() <= image_size.height - 1)) {
        throw Error(ErrorCode::invalid_input, "principal point outside the image");
    }
}

Eigen::Matrix3d Intrinsics::matrix() const
{
    Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
    k(0, 0) = focal;
    k(1, 1) = focal;
    k(0, 2) = principal_point.x();
    k(1, 2) = principal_point.y();
    return k;
}

void Pose::validate() const
{
    const double orth = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (!(orth < 1e-9) || !(std::abs(rotation.determinant() - 1.0) < 1e-9)) {
        throw Error(ErrorCode::invalid_input, "pose rotation is not a proper rotation");
    }
    if (!translation.allFinite()) {
        throw Error(ErrorCode::invalid_input, "pose translation is not finite");
    }
}

std::optional<Eigen::Vector2d> project_camera_point(const Eigen::Vector3d& camera_point, const Intrinsics& intrinsics)
{
    if (!(camera_point.z() > 0.0)) {
        return std::nullopt;
    }
    const double inv_z = 1.0 / camera_point.z();
    return Eigen::Vector2d(intrinsics.principal_point.x() + intrinsics.focal * camera_point.x() * inv_z,
                           intrinsics.principal_point.y() + intrinsics.focal * camera_point.y() * inv_z);
}

std::vector<std::optional<Eigen::Vector2d>> project(std::span<const Eigen::Vector3d> points,
                                                    const Intrinsics& intrinsics, const Pose& pose)
{
    std::vector<std::optional<Eigen::Vector2d>> out;
    out.reserve(points.size());
    for (const auto& p : points) {
        out.push_back(project_camera_point(pose.to_camera(p), intrinsics));
    }
    return out;
}

} // namespace facesynth::geometry
