#pragma once

#include "facesynth/geometry/mesh.hpp"
#include "facesynth/synth/assets.hpp"

#include <Eigen/Core>

#include <vector>

namespace facesynth::synth {

/// Parameters of the procedural head: a partial ellipsoid shell (half axes in
/// model units, roughly millimetres) with facial relief added along depth.
struct HeadShapeParams
{
    double half_width = 78.0;
    double half_height = 115.0;
    double half_depth = 95.0;
    double nose_height = 26.0;
    double nose_width = 1.0;
    double eye_depth = 8.0;
    double brow = 4.0;
    double cheek = 3.0;
    double mouth = 6.0;
    double chin = 6.0;
    double jaw_narrowing = 0.25;
};

struct HeadGrid
{
    int columns = 81;
    int rows = 81;
};

/// Frontal (x, y) positions of the 68 landmark slots on the default head.
std::vector<Eigen::Vector2d> landmark_targets();

/**
 * Builds the head mesh. The landmark map is chosen on the default parameters
 * once (nearest front-facing vertex to each target) so every parameter set
 * shares it; the symmetry map mirrors grid columns.
 */
geometry::Mesh make_generic_head(const HeadShapeParams& params = {}, HeadGrid grid = {});

/// The ten fixed parameter sets behind the bundled shape set; entry 0 is the default head.
std::vector<HeadShapeParams> generic_shape_family();

ShapeSet make_shape_set(HeadGrid grid = {});

/// Synthetic mouth-open, mouth-closed and smile displacement fields on `neutral`.
BlendshapeBasis make_blendshape_basis(const geometry::Mesh& neutral);

} // namespace facesynth::synth
