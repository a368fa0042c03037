#pragma once

#include "facesynth/geometry/camera.hpp"
#include "facesynth/geometry/landmarks.hpp"
#include "facesynth/geometry/mesh.hpp"
#include "facesynth/geometry/pose_estimation.hpp"
#include "facesynth/render/image.hpp"
#include "facesynth/synth/assets.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace facesynth::synth {

using ExpressionCoefficients = std::array<double, expression_count>;

struct ExpressionFit
{
    ExpressionCoefficients coefficients{};
    /// RMS reprojection distance of the mouth landmarks, in pixels.
    double residual = 0.0;
    int iterations = 0;
    int landmarks_used = 0;
};

inline constexpr int min_mouth_landmarks = 6;

/**
 * Fits the box-constrained ([0, 1] per coefficient) expression coefficients
 * that minimise the mouth landmark reprojection error of
 * `neutral + sum_k c_k * basis.deltas[k]` at a fixed pose.
 * Throws expression_unfittable with fewer than six visible mouth landmarks.
 */
ExpressionFit fit_expression(const geometry::LandmarkSet2D& landmarks, const geometry::Mesh& neutral,
                             const BlendshapeBasis& basis, const geometry::Pose& pose,
                             const geometry::Intrinsics& intrinsics);

struct NeutralizeOptions
{
    int feather_band = 3;
};

struct NeutralizeResult
{
    /// Equals the input bit for bit when skipped.
    render::RasterImage image;
    bool skipped = false;
    std::string skip_reason;
    geometry::PoseEstimate pose;
    ExpressionFit fit;
    ExpressionCoefficients neutral_coefficients{};
    /// Composite weight of the re-rendered face per pixel; 0 means copied from the input.
    std::vector<float> alpha;
};

/**
 * Removes mouth opening: estimates the pose from the rigid landmarks, fits the
 * expression, lifts the texture with the fitted mesh, re-renders with the
 * opening coefficient set to zero (other coefficients kept) at the original
 * pose, and composites inside the silhouette with a feathered edge.
 * Pose or fit failures produce a skipped result instead of throwing.
 */
NeutralizeResult neutralize_expression(const render::RasterImage& image, const geometry::LandmarkSet2D& landmarks,
                                       const geometry::Mesh& neutral, const BlendshapeBasis& basis,
                                       const NeutralizeOptions& options = {});

} // namespace facesynth::synth
