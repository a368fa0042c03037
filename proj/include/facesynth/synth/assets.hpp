#pragma once

#include "facesynth/geometry/mesh.hpp"

#include <Eigen/Core>

#include <array>
#include <string>
#include <vector>

namespace facesynth::synth {

inline constexpr int shape_count = 10;

/// Ten generic face shapes with one shared topology and landmark map.
struct ShapeSet
{
    std::vector<geometry::Mesh> shapes;

    const geometry::Mesh& at(int id) const { return shapes.at(static_cast<std::size_t>(id)); }
    std::size_t size() const noexcept { return shapes.size(); }

    /// Throws invalid_input unless there are exactly ten shapes with identical
    /// vertex counts, triangles and landmark maps.
    void validate() const;
};

enum class Expression { mouth_open = 0, mouth_closed = 1, smile = 2 };
inline constexpr int expression_count = 3;
const char* to_string(Expression e) noexcept;

/// Neutral mesh plus per-vertex displacement fields; coefficients live in [0, 1].
struct BlendshapeBasis
{
    geometry::Mesh neutral;
    std::array<std::vector<Eigen::Vector3d>, expression_count> deltas;

    /// neutral + sum_k coefficients[k] * deltas[k]; topology and maps copied.
    geometry::Mesh instantiate(const std::array<double, expression_count>& coefficients) const;

    void validate() const;
};

/**
 * On-disk layout of a shape set directory:
 *   shape_00.obj ... shape_09.obj   vertices and faces
 *   landmarks.txt                   "slot vertex_index", shared by all shapes
 *   symmetry.txt                    "vertex mirror", shared by all shapes
 */
ShapeSet load_shape_set(const std::string& directory);
void save_shape_set(const std::string& directory, const ShapeSet& set);

/**
 * Blendshape directory: neutral.obj plus one full target mesh per expression
 * (mouth_open.obj, mouth_closed.obj, smile.obj); deltas are target - neutral.
 * landmarks.txt and symmetry.txt as for shape sets.
 */
BlendshapeBasis load_blendshape_basis(const std::string& directory);
void save_blendshape_basis(const std::string& directory, const BlendshapeBasis& basis);

} // namespace facesynth::synth
