#include "facesynth/geometry/mesh.hpp"

#include "facesynth/error.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace facesynth::geometry {

void Mesh::validate(int schema_slots) const
{
    const int n = static_cast<int>(vertices.size());
    for (const auto& tri : triangles) {
        for (int idx : tri) {
            if (idx < 0 || idx >= n) {
                throw Error(ErrorCode::invalid_input, "triangle index out of range");
            }
        }
    }
    if (static_cast<int>(landmark_map.size()) != schema_slots) {
        throw Error(ErrorCode::invalid_input, "landmark map does not cover the schema");
    }
    for (int idx : landmark_map) {
        if (idx < 0 || idx >= n) {
            throw Error(ErrorCode::invalid_input, "landmark vertex out of range");
        }
    }
    if (!symmetry_map.empty()) {
        if (symmetry_map.size() != vertices.size()) {
            throw Error(ErrorCode::invalid_input, "symmetry map size mismatch");
        }
        for (int v = 0; v < n; ++v) {
            const int m = symmetry_map[v];
            if (m < 0 || m >= n || symmetry_map[m] != v) {
                throw Error(ErrorCode::invalid_input, "symmetry map is not an involution");
            }
        }
    }
}

double Mesh::depth_extent() const
{
    if (vertices.empty()) {
        return 0.0;
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& v : vertices) {
        lo = std::min(lo, v.z());
        hi = std::max(hi, v.z());
    }
    return hi - lo;
}

namespace {

int parse_face_index(const std::string& token, int num_vertices)
{
    const auto slash = token.find('/');
    const int raw = std::stoi(token.substr(0, slash));
    const int idx = raw > 0 ? raw - 1 : num_vertices + raw;
    return idx;
}

} // namespace

Mesh read_obj(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::io_error, "cannot open mesh " + path);
    }
    Mesh mesh;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.size() < 2) {
            continue;
        }
        std::istringstream row(line);
        std::string tag;
        row >> tag;
        if (tag == "v") {
            double x = 0;
            double y = 0;
            double z = 0;
            if (!(row >> x >> y >> z)) {
                throw Error(ErrorCode::invalid_input, path + ": bad vertex at line " + std::to_string(line_number));
            }
            mesh.vertices.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<int> poly;
            std::string token;
            while (row >> token) {
                try {
                    poly.push_back(parse_face_index(token, static_cast<int>(mesh.vertices.size())));
                } catch (const std::exception&) {
                    throw Error(ErrorCode::invalid_input, path + ": bad face at line " + std::to_string(line_number));
                }
            }
            if (poly.size() < 3) {
                throw Error(ErrorCode::invalid_input, path + ": degenerate face at line " + std::to_string(line_number));
            }
            for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
                mesh.triangles.push_back({poly[0], poly[k], poly[k + 1]});
            }
        }
    }
    const int n = static_cast<int>(mesh.vertices.size());
    for (const auto& tri : mesh.triangles) {
        for (int idx : tri) {
            if (idx < 0 || idx >= n) {
                throw Error(ErrorCode::invalid_input, path + ": face index out of range");
            }
        }
    }
    return mesh;
}

void write_obj(const std::string& path, const Mesh& mesh)
{
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::io_error, "cannot write mesh " + path);
    }
    char buffer[128];
    for (const auto& v : mesh.vertices) {
        std::snprintf(buffer, sizeof buffer, "v %.4f %.4f %.4f\n", v.x(), v.y(), v.z());
        out << buffer;
    }
    for (const auto& t : mesh.triangles) {
        out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    }
}

std::vector<int> read_landmark_map(const std::string& path, int schema_slots)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::io_error, "cannot open landmark map " + path);
    }
    std::vector<int> map(schema_slots, -1);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream row(line);
        int slot = -1;
        int vertex = -1;
        if (!(row >> slot >> vertex) || slot < 0 || slot >= schema_slots) {
            throw Error(ErrorCode::invalid_input, path + ": bad landmark map row '" + line + "'");
        }
        map[slot] = vertex;
    }
    if (std::find(map.begin(), map.end(), -1) != map.end()) {
        throw Error(ErrorCode::invalid_input, path + ": landmark map does not cover every slot");
    }
    return map;
}

void write_landmark_map(const std::string& path, const std::vector<int>& map)
{
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::io_error, "cannot write " + path);
    }
    for (std::size_t slot = 0; slot < map.size(); ++slot) {
        out << slot << ' ' << map[slot] << '\n';
    }
}

std::vector<int> read_symmetry_map(const std::string& path, std::size_t num_vertices)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::io_error, "cannot open symmetry map " + path);
    }
    std::vector<int> map(num_vertices, -1);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream row(line);
        long v = -1;
        long m = -1;
        if (!(row >> v >> m) || v < 0 || v >= static_cast<long>(num_vertices)) {
            throw Error(ErrorCode::invalid_input, path + ": bad symmetry row '" + line + "'");
        }
        map[v] = static_cast<int>(m);
    }
    if (std::find(map.begin(), map.end(), -1) != map.end()) {
        throw Error(ErrorCode::invalid_input, path + ": symmetry map does not cover every vertex");
    }
    return map;
}

void write_symmetry_map(const std::string& path, const std::vector<int>& map)
{
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::io_error, "cannot write " + path);
    }
    for (std::size_t v = 0; v < map.size(); ++v) {
        out << v << ' ' << map[v] << '\n';
    }
}

} // namespace facesynth::geometry
