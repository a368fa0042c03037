#pragma once

#include <Eigen/Core>

#include <array>
#include <string>
#include <vector>

namespace facesynth::geometry {

/**
 * A triangle mesh in model units. Model frame: x to the image right, y down,
 * z away from the viewer, so an identity pose looks straight at the face.
 *
 * landmark_map[slot] is the vertex carrying 3D landmark `slot` of the schema.
 * symmetry_map[v] is the mirror vertex of v across the sagittal plane, or the
 * map is empty when the mesh has none.
 */
struct Mesh
{
    std::vector<Eigen::Vector3d> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<int> landmark_map;
    std::vector<int> symmetry_map;

    std::size_t num_vertices() const noexcept { return vertices.size(); }
    bool has_symmetry() const noexcept { return !symmetry_map.empty(); }

    Eigen::Vector3d landmark(int slot) const { return vertices.at(landmark_map.at(slot)); }

    /// Throws invalid_input on out-of-range indices, a partial landmark map
    /// (given the schema size) or a symmetry map that is not an involution.
    void validate(int schema_slots) const;

    /// Extent of the vertices along z.
    double depth_extent() const;
};

/// Reads `v x y z` and `f a b c` lines (1-based, `a/t/n` forms accepted,
/// polygons fanned into triangles). Other record types are ignored.
Mesh read_obj(const std::string& path);
void write_obj(const std::string& path, const Mesh& mesh);

/// Sidecar text: one "slot vertex_index" pair per line (0-based vertex).
std::vector<int> read_landmark_map(const std::string& path, int schema_slots);
void write_landmark_map(const std::string& path, const std::vector<int>& map);

/// Sidecar text: one "vertex_index mirror_index" pair per line, all vertices.
std::vector<int> read_symmetry_map(const std::string& path, std::size_t num_vertices);
void write_symmetry_map(const std::string& path, const std::vector<int>& map);

} // namespace facesynth::geometry
