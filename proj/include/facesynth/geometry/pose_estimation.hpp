#pragma once

#include "facesynth/geometry/camera.hpp"
#include "facesynth/geometry/landmarks.hpp"
#include "facesynth/geometry/mesh.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

namespace facesynth::geometry {

inline constexpr int min_pose_correspondences = 6;

struct PoseOptions
{
    /// Defaults to the image centre.
    std::optional<Eigen::Vector2d> principal_point;
    /// Restrict the fit to these schema slots (still filtered by visibility).
    std::vector<int> slots;
    /// Initial focal length; defaults to the image width.
    std::optional<double> initial_focal;
    int max_iterations = 300;
};

struct PoseEstimate
{
    Intrinsics intrinsics;
    Pose pose;
    /// Root mean square landmark reprojection distance, in pixels.
    double residual = 0.0;
    int iterations = 0;
};

/**
 * Recovers rotation, translation and focal length from 2D-3D correspondences
 * with the principal point held fixed. A DLT solve in normalised camera
 * coordinates seeds a Levenberg-Marquardt refinement of the squared
 * reprojection error over (R, t, focal).
 *
 * Throws insufficient_landmarks with fewer than six correspondences and
 * pose_failure when the 2D points are degenerate (collinear) or the optimiser
 * ends with a residual larger than the image diagonal.
 */
PoseEstimate estimate_pose(std::span<const Eigen::Vector2d> image_points, std::span<const Eigen::Vector3d> model_points,
                           ImageSize image_size, const PoseOptions& options = {});

/// Pose from the visible landmarks of `landmarks` and the mesh's 3D landmarks.
PoseEstimate estimate_pose(const LandmarkSet2D& landmarks, const Mesh& mesh, ImageSize image_size,
                           const PoseOptions& options = {});

/// RMS reprojection distance of the given correspondences.
double reprojection_rms(std::span<const Eigen::Vector2d> image_points, std::span<const Eigen::Vector3d> model_points,
                        const Intrinsics& intrinsics, const Pose& pose);

} // namespace facesynth::geometry
