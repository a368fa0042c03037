#include "facesynth/synth/assets.hpp"

#include "facesynth/error.hpp"
#include "facesynth/geometry/landmarks.hpp"

#include <cstdio>
#include <filesystem>

namespace facesynth::synth {

namespace fs = std::filesystem;

const char* to_string(Expression e) noexcept
{
    switch (e) {
    case Expression::mouth_open: return "mouth_open";
    case Expression::mouth_closed: return "mouth_closed";
    case Expression::smile: return "smile";
    }
    return "unknown";
}

void ShapeSet::validate() const
{
    if (shapes.size() != static_cast<std::size_t>(shape_count)) {
        throw Error(ErrorCode::invalid_input, "a shape set holds exactly ten shapes");
    }
    const auto& ref = shapes.front();
    for (const auto& s : shapes) {
        s.validate(geometry::ibug68::count);
        if (s.vertices.size() != ref.vertices.size() || s.triangles != ref.triangles ||
            s.landmark_map != ref.landmark_map) {
            throw Error(ErrorCode::invalid_input, "shapes in a set must share topology and landmarks");
        }
    }
}

geometry::Mesh BlendshapeBasis::instantiate(const std::array<double, expression_count>& coefficients) const
{
    geometry::Mesh mesh = neutral;
    for (int k = 0; k < expression_count; ++k) {
        if (coefficients[k] == 0.0) {
            continue;
        }
        for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
            mesh.vertices[v] += coefficients[k] * deltas[k][v];
        }
    }
    return mesh;
}

void BlendshapeBasis::validate() const
{
    neutral.validate(geometry::ibug68::count);
    for (const auto& d : deltas) {
        if (d.size() != neutral.vertices.size()) {
            throw Error(ErrorCode::invalid_input, "blendshape delta does not match the neutral mesh");
        }
    }
}

namespace {

std::string shape_file(const fs::path& dir, int id)
{
    char name[32];
    std::snprintf(name, sizeof name, "shape_%02d.obj", id);
    return (dir / name).string();
}

} // namespace

ShapeSet load_shape_set(const std::string& directory)
{
    const fs::path dir(directory);
    ShapeSet set;
    const auto landmarks = geometry::read_landmark_map((dir / "landmarks.txt").string(), geometry::ibug68::count);
    std::vector<int> symmetry;
    for (int id = 0; id < shape_count; ++id) {
        auto mesh = geometry::read_obj(shape_file(dir, id));
        if (id == 0 && fs::exists(dir / "symmetry.txt")) {
            symmetry = geometry::read_symmetry_map((dir / "symmetry.txt").string(), mesh.vertices.size());
        }
        mesh.landmark_map = landmarks;
        mesh.symmetry_map = symmetry;
        set.shapes.push_back(std::move(mesh));
    }
    set.validate();
    return set;
}

void save_shape_set(const std::string& directory, const ShapeSet& set)
{
    set.validate();
    const fs::path dir(directory);
    fs::create_directories(dir);
    for (int id = 0; id < shape_count; ++id) {
        geometry::write_obj(shape_file(dir, id), set.at(id));
    }
    geometry::write_landmark_map((dir / "landmarks.txt").string(), set.at(0).landmark_map);
    if (set.at(0).has_symmetry()) {
        geometry::write_symmetry_map((dir / "symmetry.txt").string(), set.at(0).symmetry_map);
    }
}

BlendshapeBasis load_blendshape_basis(const std::string& directory)
{
    const fs::path dir(directory);
    BlendshapeBasis basis;
    basis.neutral = geometry::read_obj((dir / "neutral.obj").string());
    basis.neutral.landmark_map =
        geometry::read_landmark_map((dir / "landmarks.txt").string(), geometry::ibug68::count);
    if (fs::exists(dir / "symmetry.txt")) {
        basis.neutral.symmetry_map =
            geometry::read_symmetry_map((dir / "symmetry.txt").string(), basis.neutral.vertices.size());
    }
    for (int k = 0; k < expression_count; ++k) {
        const auto target = geometry::read_obj((dir / (std::string(to_string(static_cast<Expression>(k))) + ".obj")).string());
        if (target.vertices.size() != basis.neutral.vertices.size()) {
            throw Error(ErrorCode::invalid_input, "blendshape target vertex count differs from neutral");
        }
        basis.deltas[k].resize(target.vertices.size());
        for (std::size_t v = 0; v < target.vertices.size(); ++v) {
            basis.deltas[k][v] = target.vertices[v] - basis.neutral.vertices[v];
        }
    }
    basis.validate();
    return basis;
}

void save_blendshape_basis(const std::string& directory, const BlendshapeBasis& basis)
{
    basis.validate();
    const fs::path dir(directory);
    fs::create_directories(dir);
    geometry::write_obj((dir / "neutral.obj").string(), basis.neutral);
    geometry::write_landmark_map((dir / "landmarks.txt").string(), basis.neutral.landmark_map);
    if (basis.neutral.has_symmetry()) {
        geometry::write_symmetry_map((dir / "symmetry.txt").string(), basis.neutral.symmetry_map);
    }
    for (int k = 0; k < expression_count; ++k) {
        std::array<double, expression_count> c{};
        c[k] = 1.0;
        geometry::write_obj((dir / (std::string(to_string(static_cast<Expression>(k))) + ".obj")).string(),
                            basis.instantiate(c));
    }
}

} // namespace facesynth::synth
