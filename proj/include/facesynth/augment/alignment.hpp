#pragma once

#include "facesynth/geometry/landmarks.hpp"
#include "facesynth/geometry/mesh.hpp"
#include "facesynth/geometry/similarity.hpp"
#include "facesynth/render/image.hpp"
#include "facesynth/synth/novel_views.hpp"

#include <Eigen/Core>

#include <array>
#include <optional>
#include <string>

namespace facesynth::augment {

enum class AlignmentClass { frontal, profile };
enum class Alignment { frontal9, profile2, bbox_fallback };

const char* to_string(Alignment a) noexcept;

inline constexpr double default_frontal_threshold = 30.0;

/// frontal when |yaw| <= threshold (boundary inclusive).
AlignmentClass classify_alignment(double yaw_degrees, double threshold = default_frontal_threshold);

/// Target coordinates on the square alignment canvas.
struct AlignmentTemplates
{
    int size = 256;
    /// Positions of ibug68::frontal9, in that order.
    std::array<Eigen::Vector2d, 9> frontal{};
    /// Profile template for a face turned toward positive yaw: the image-right
    /// (near) eye centre and the nose tip. The other side is its mirror image.
    Eigen::Vector2d profile_eye = Eigen::Vector2d::Zero();
    Eigen::Vector2d profile_nose = Eigen::Vector2d::Zero();
};

inline constexpr double profile_template_yaw = 55.0;

/// Templates projected from `generic` on the synthesis canvas: frontal at yaw 0,
/// profile at profile_template_yaw.
AlignmentTemplates make_alignment_templates(const geometry::Mesh& generic, const synth::CanvasSpec& canvas = {});

/// An eye counts as visible when at least this many of its six points are.
inline constexpr int min_visible_eye_points = 4;

struct AlignedImage
{
    render::RasterImage image;
    geometry::Similarity2D transform;
    Alignment alignment = Alignment::frontal9;
};

/// Similarity from image coordinates to the template canvas; throws alignment_failure
/// when the slots required by `cls` are not visible.
geometry::Similarity2D alignment_transform(const geometry::LandmarkSet2D& landmarks, AlignmentClass cls,
                                           const AlignmentTemplates& templates);

/**
 * Frontal: least squares over the nine template slots. Profile: exact fit of the
 * visible eye centre and the nose tip; when both eyes are visible the one
 * farther from the nose tip in the image is used. Output is templates.size square.
 */
AlignedImage align_in_plane(const render::RasterImage& image, const geometry::LandmarkSet2D& landmarks,
                            AlignmentClass cls, const AlignmentTemplates& templates);

/// Axis-aligned face box in pixels.
struct BoundingBox
{
    double x = 0.0;
    double y = 0.0;
    double width = 0.0;
    double height = 0.0;
};

/// "x y width height" on the first non-comment line.
BoundingBox read_bounding_box(const std::string& path);

/// Square crop around the box (side = larger box side), or the centred square of
/// side min(width, height) without a box, scaled to size x size.
AlignedImage crop_fallback(const render::RasterImage& image, const std::optional<BoundingBox>& box, int size);

} // namespace facesynth::augment
