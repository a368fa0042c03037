#pragma once

#include "facesynth/geometry/camera.hpp"
#include "facesynth/geometry/landmarks.hpp"
#include "facesynth/geometry/mesh.hpp"
#include "facesynth/render/image.hpp"
#include "facesynth/synth/generic_head.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace facesynth::synth {

/// Procedural skin texture of one synthetic identity, defined over the
/// frontal (x, y) coordinates of the generic head.
struct FaceAppearance
{
    struct Blob
    {
        Eigen::Vector2d centre;
        double sigma = 10.0;
        Eigen::Vector3d colour;
    };

    Eigen::Vector3d skin{190.0, 150.0, 130.0};
    Eigen::Vector3d lips{170.0, 80.0, 80.0};
    Eigen::Vector3d iris{60.0, 45.0, 35.0};
    Eigen::Vector3d brows{70.0, 55.0, 45.0};
    double brow_thickness = 3.0;
    std::vector<Blob> blobs;
    /// Low-frequency stripes: amplitude, spatial frequencies and phase.
    double pattern_amplitude = 8.0;
    Eigen::Vector2d pattern_frequency{0.09, 0.07};
    double pattern_phase = 0.0;
};

struct SyntheticIdentity
{
    FaceAppearance appearance;
    HeadShapeParams shape;
};

/// Random but reproducible identity: jittered head parameters and texture.
SyntheticIdentity random_identity(std::uint64_t seed);

struct SyntheticCamera
{
    double yaw = 0.0;
    double pitch = 0.0;
    double roll = 0.0;
    int width = 256;
    int height = 256;
    double focal = 500.0;
    double distance = 700.0;
    /// Image-plane offset of the face centre from the principal point, in pixels.
    Eigen::Vector2d offset = Eigen::Vector2d::Zero();
    Eigen::Vector3d background{40.0, 60.0, 80.0};
};

struct SyntheticFace
{
    render::RasterImage image;
    geometry::LandmarkSet2D landmarks;
    geometry::Intrinsics intrinsics;
    geometry::Pose pose;
    /// 1 where the head covers the pixel.
    std::vector<std::uint8_t> mask;
};

/// Camera placement used by render_synthetic_face: the landmark centroid of
/// `mesh` sits `distance` in front of the camera, displaced by `offset` pixels.
geometry::Pose synthetic_pose(const geometry::Mesh& mesh, const SyntheticCamera& camera);

/**
 * Renders `mesh` with the procedural texture looked up at `material`, a mesh
 * of identical topology whose vertex positions act as texture coordinates.
 * Shading is a mild headlight Lambert term. Landmarks are exact projections of
 * the mesh landmarks with depth-test visibility.
 */
SyntheticFace render_synthetic_face(const geometry::Mesh& mesh, const geometry::Mesh& material,
                                    const FaceAppearance& appearance, const SyntheticCamera& camera);

/// Adds zero-mean Gaussian noise of `sigma` pixels to every landmark.
void perturb_landmarks(geometry::LandmarkSet2D& landmarks, double sigma, std::uint64_t seed);

} // namespace facesynth::synth
