#pragma once

#include "facesynth/geometry/camera.hpp"
#include "facesynth/geometry/landmarks.hpp"
#include "facesynth/geometry/mesh.hpp"
#include "facesynth/render/image.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace facesynth::render {

/// Per-pixel result of z-buffered triangle traversal.
struct FragmentBuffer
{
    int width = 0;
    int height = 0;
    /// Camera-space depth of the nearest surface, +inf where nothing covers.
    std::vector<double> depth;
    /// Index of the winning triangle, -1 for background.
    std::vector<int> triangle;
    /// Perspective-correct barycentric weights of the winning triangle.
    std::vector<Eigen::Vector3d> weights;

    std::size_t index(int x, int y) const noexcept { return static_cast<std::size_t>(y) * width + x; }
    bool covered(std::size_t i) const noexcept { return triangle[i] >= 0; }
};

/**
 * Z-buffered traversal of `triangles` whose vertices are given in camera space.
 * Pixel centres sit on integer coordinates and coverage is inclusive of edges;
 * triangles are visited in index order and a fragment replaces the stored one
 * only when strictly nearer, so output is deterministic. Triangles with a
 * vertex at or behind the camera plane are skipped.
 */
FragmentBuffer rasterize_fragments(std::span<const Eigen::Vector3d> camera_points,
                                   std::span<const std::array<int, 3>> triangles,
                                   const geometry::Intrinsics& intrinsics);

/// Depth tolerance used for visibility: 1e-3 of the mesh's depth extent.
double default_depth_tolerance(const geometry::Mesh& mesh);

/**
 * Per-vertex visibility: a vertex is visible when no triangle that does not
 * contain it covers its projection at a depth more than `depth_tolerance`
 * nearer to the camera. Vertices behind the camera are invisible. A negative
 * tolerance selects default_depth_tolerance(mesh).
 */
std::vector<bool> vertex_visibility(const geometry::Mesh& mesh, const geometry::Pose& pose,
                                    const geometry::Intrinsics& intrinsics, double depth_tolerance = -1.0);

/// Landmarks of `mesh` seen from `pose`; visibility comes from vertex_visibility
/// and the image bounds. Points behind the camera are left at the origin.
geometry::LandmarkSet2D project_landmarks(const geometry::Mesh& mesh, const geometry::Pose& pose,
                                          const geometry::Intrinsics& intrinsics);

/// Per-vertex source-image coordinates; valid = projects inside the source and visible.
struct TexCoords
{
    std::vector<Eigen::Vector2d> uv;
    std::vector<bool> valid;

    std::size_t valid_count() const noexcept;
};

TexCoords texture_from_image(const geometry::Mesh& mesh, const RasterImage& source, const geometry::Pose& source_pose,
                             const geometry::Intrinsics& intrinsics);

struct RenderOutput
{
    RasterImage image;
    /// 1 where the face was drawn; background pixels are exactly 0 in `image`.
    std::vector<std::uint8_t> mask;
    /// Camera depth where mask is set, +inf elsewhere.
    std::vector<float> depth;
    FragmentBuffer fragments;
    /// 1 where all three vertex texture coordinates of the covering triangle are valid.
    std::vector<std::uint8_t> direct_valid;
    /// Share of the mirrored sample in the final pixel (0 = purely direct).
    std::vector<float> mirror_weight;
    /// Nothing of the mesh landed on the canvas.
    bool empty = false;
    /// Symmetry fill was requested but the mesh has no symmetry map.
    bool symmetry_skipped = false;

    std::size_t mask_area() const noexcept;
};

inline constexpr int default_feather_band = 3;

/**
 * Soft-symmetry fill. Covered pixels without a valid direct texture take the
 * bilinear source sample at the mirrored vertices' texture coordinates (same
 * barycentric weights). Valid pixels within `band` pixels (chessboard distance)
 * of such a hole are blended toward the mirrored sample, weight falling off
 * linearly with distance. Pixels valid on neither side stay black and are
 * removed from the mask.
 */
RenderOutput soft_symmetry_fill(RenderOutput partial, const geometry::Mesh& mesh, const TexCoords& texcoords,
                                const RasterImage& source, int band = default_feather_band);

/**
 * Renders the texture-mapped mesh at `target_pose` onto a canvas described by
 * `intrinsics` (its image_size is the output size). Texture coordinates are
 * interpolated perspective-correctly and the source is sampled bilinearly;
 * holes are filled by soft_symmetry_fill. The background is exactly black.
 */
RenderOutput rasterize(const geometry::Mesh& mesh, const TexCoords& texcoords, const RasterImage& source,
                       const geometry::Pose& target_pose, const geometry::Intrinsics& intrinsics,
                       int band = default_feather_band);

/// Transforms all mesh vertices into camera space.
std::vector<Eigen::Vector3d> to_camera_space(const geometry::Mesh& mesh, const geometry::Pose& pose);

} // namespace facesynth::render
