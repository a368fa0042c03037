#pragma once

#include "facesynth/geometry/camera.hpp"
#include "facesynth/geometry/landmarks.hpp"
#include "facesynth/geometry/mesh.hpp"
#include "facesynth/geometry/pose_estimation.hpp"
#include "facesynth/geometry/rotation.hpp"
#include "facesynth/render/rasterizer.hpp"
#include "facesynth/synth/assets.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace facesynth::synth {

/// Output canvas for synthesized views.
struct CanvasSpec
{
    int size = 256;
    /// Projected distance between the two eye centres at yaw 0, as a fraction of the width.
    double eye_fraction = 0.35;
};

struct CanvasView
{
    geometry::Intrinsics intrinsics;
    geometry::Pose pose;
};

/**
 * Camera placing `mesh` on the canvas: the centroid of its landmarks projects
 * to the canvas centre, and the focal length is fixed per mesh (from the
 * frontal eye distance), so the scale does not change with the view angles.
 */
CanvasView canvas_view(const geometry::Mesh& mesh, double yaw, double pitch, double roll, const CanvasSpec& canvas = {});

inline constexpr double default_view_yaws[] = {0.0, 40.0, 75.0};

/// Magnitudes of `yaws` carrying the sign of `source_yaw` (non-negative source counts as positive).
std::vector<double> signed_yaws(std::span<const double> yaws, double source_yaw);

struct NovelViews
{
    geometry::PoseEstimate source;
    geometry::EulerAngles source_angles;
    std::vector<double> yaws;
    std::vector<render::RenderOutput> views;
};

struct NovelViewOptions
{
    CanvasSpec canvas;
    /// Replace each requested yaw by |yaw| with the sign of the source yaw.
    bool match_source_sign = true;
};

/**
 * Estimates the source pose against `shape`, lifts the texture from `image`
 * and renders one view per requested yaw, keeping the source pitch and roll.
 * Pose failures propagate as exceptions; no views are produced then.
 */
NovelViews render_novel_views(const render::RasterImage& image, const geometry::LandmarkSet2D& landmarks,
                              const geometry::Mesh& shape, std::span<const double> yaws,
                              const NovelViewOptions& options = {});

/// Deterministic, uniform shape choice for one source image.
int pick_shape(std::uint64_t seed, std::string_view source_image_id, int shape_count = synth::shape_count);

} // namespace facesynth::synth
