#pragma once

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

namespace facesynth::geometry {

struct ImageSize
{
    int width = 0;
    int height = 0;

    double diagonal() const noexcept;
    friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

/// Pinhole intrinsics with square pixels and zero skew. Pixel centres sit at
/// integer coordinates.
struct Intrinsics
{
    double focal = 1.0;
    Eigen::Vector2d principal_point = Eigen::Vector2d::Zero();
    ImageSize image_size;

    /// Principal point at the image centre ((w-1)/2, (h-1)/2).
    static Intrinsics centered(double focal, ImageSize size);

    /// Throws invalid_input unless focal > 0 and the principal point lies
    /// inside the image.
    void validate() const;

    Eigen::Matrix3d matrix() const;
};

/// Rigid model-to-camera transform: X_cam = rotation * X_model + translation.
struct Pose
{
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    /// Throws invalid_input unless rotation is orthonormal with det +1 (1e-9).
    void validate() const;

    Eigen::Vector3d to_camera(const Eigen::Vector3d& model_point) const
    {
        return rotation * model_point + translation;
    }
};

/// Perspective projection of one camera-space point; nullopt when the point
/// is not strictly in front of the camera.
std::optional<Eigen::Vector2d> project_camera_point(const Eigen::Vector3d& camera_point, const Intrinsics& intrinsics);

/// Projects model points; points behind the camera come back as nullopt.
std::vector<std::optional<Eigen::Vector2d>> project(std::span<const Eigen::Vector3d> points,
                                                    const Intrinsics& intrinsics, const Pose& pose);

} // namespace facesynth::geometry
