#include "facesynth/synth/generic_head.hpp"

#include "facesynth/error.hpp"
#include "facesynth/geometry/landmarks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace facesynth::synth {

namespace {

constexpr double max_longitude_deg = 105.0;
constexpr double min_latitude_deg = -50.0;
constexpr double max_latitude_deg = 50.0;

double gauss(double u) noexcept
{
    return std::exp(-0.5 * u * u);
}

double smoothstep(double lo, double hi, double v) noexcept
{
    const double t = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

double deg(double d) noexcept
{
    return d * std::numbers::pi / 180.0;
}

Eigen::Vector3d surface_point(const HeadShapeParams& p, double longitude, double latitude)
{
    const double x0 = p.half_width * std::sin(longitude) * std::cos(latitude);
    const double y = p.half_height * std::sin(latitude);
    double z = -p.half_depth * std::cos(longitude) * std::cos(latitude);
    const double front = smoothstep(0.0, 0.5, std::cos(longitude));
    const double ax = std::abs(x0);

    // Nose: ridge rising from the bridge to the tip, wider toward the nostrils.
    const double up = std::clamp((y + 30.0) / 40.0, 0.0, 1.0);
    const double down = y > 10.0 ? gauss((y - 10.0) / 6.0) : 1.0;
    const double nose_profile = p.nose_height * (0.25 + 0.75 * up * up) * down * smoothstep(-38.0, -28.0, y);
    const double nose_sigma = p.nose_width * (6.0 + 6.0 * up);
    double relief = nose_profile * gauss(x0 / nose_sigma);

    relief -= p.eye_depth * gauss((ax - 32.0) / 11.0) * gauss((y + 28.0) / 8.0);
    relief += p.brow * gauss((ax - 30.0) / 14.0) * gauss((y + 44.0) / 6.0);
    relief += p.cheek * gauss((ax - 42.0) / 12.0) * gauss((y - 5.0) / 12.0);
    relief += p.mouth * gauss(x0 / 22.0) * gauss((y - 45.0) / 9.0);
    relief -= 1.5 * gauss(x0 / 18.0) * gauss((y - 45.0) / 1.5);
    relief += p.chin * gauss(x0 / 16.0) * gauss((y - 76.0) / 9.0);
    z -= front * relief;

    const double x = x0 * (1.0 - p.jaw_narrowing * smoothstep(15.0, 90.0, y));
    return {x, y, z};
}

struct GridMesh
{
    geometry::Mesh mesh;
    std::vector<double> longitude;
};

GridMesh build_grid(const HeadShapeParams& params, HeadGrid grid)
{
    if (grid.columns < 9 || grid.rows < 9 || grid.columns % 2 == 0) {
        throw Error(ErrorCode::invalid_input, "head grid needs an odd column count and at least 9 rows");
    }
    GridMesh out;
    auto& mesh = out.mesh;
    for (int r = 0; r < grid.rows; ++r) {
        const double lat = deg(min_latitude_deg + (max_latitude_deg - min_latitude_deg) * r / (grid.rows - 1));
        for (int c = 0; c < grid.columns; ++c) {
            const double t = -1.0 + 2.0 * c / (grid.columns - 1);
            const double lon = deg(max_longitude_deg) * t;
            mesh.vertices.push_back(surface_point(params, lon, lat));
            out.longitude.push_back(lon);
        }
    }
    const int centre = grid.columns / 2;
    auto id = [&](int r, int c) { return r * grid.columns + c; };
    for (int r = 0; r + 1 < grid.rows; ++r) {
        for (int c = 0; c + 1 < grid.columns; ++c) {
            const int a = id(r, c);
            const int b = id(r, c + 1);
            const int d = id(r + 1, c);
            const int e = id(r + 1, c + 1);
            // Diagonals mirror across the centre column.
            if (c < centre) {
                mesh.triangles.push_back({a, d, b});
                mesh.triangles.push_back({b, d, e});
            } else {
                mesh.triangles.push_back({a, d, e});
                mesh.triangles.push_back({a, e, b});
            }
        }
    }
    mesh.symmetry_map.resize(mesh.vertices.size());
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.columns; ++c) {
            mesh.symmetry_map[id(r, c)] = id(r, grid.columns - 1 - c);
        }
    }
    return out;
}

std::vector<int> select_landmarks(const GridMesh& g)
{
    const auto targets = landmark_targets();
    std::vector<int> map;
    std::set<int> used;
    for (const auto& t : targets) {
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t v = 0; v < g.mesh.vertices.size(); ++v) {
            if (std::cos(g.longitude[v]) < 0.2) {
                continue;
            }
            const double d = (g.mesh.vertices[v].head<2>() - t).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(v);
            }
        }
        if (best < 0 || !used.insert(best).second) {
            throw Error(ErrorCode::invalid_input, "landmark targets collide on the head grid; use a finer grid");
        }
        map.push_back(best);
    }
    return map;
}

} // namespace

std::vector<Eigen::Vector2d> landmark_targets()
{
    std::vector<Eigen::Vector2d> t;
    for (int k = 0; k <= 16; ++k) {
        const double a = std::numbers::pi * k / 16.0;
        t.emplace_back(-68.0 * std::cos(a), -18.0 + 96.0 * std::sin(a));
    }
    const double brow[5][2] = {{-50, -42}, {-41, -47}, {-31, -49}, {-21, -48}, {-12, -45}};
    for (const auto& b : brow) {
        t.emplace_back(b[0], b[1]);
    }
    for (int k = 4; k >= 0; --k) {
        t.emplace_back(-brow[k][0], brow[k][1]);
    }
    for (double y : {-27.0, -15.0, -3.0, 10.0}) {
        t.emplace_back(0.0, y);
    }
    for (double x : {-14.0, -7.0, 0.0, 7.0, 14.0}) {
        t.emplace_back(x, x == 0.0 ? 22.0 : (std::abs(x) < 10.0 ? 21.0 : 19.0));
    }
    const double eye[6][2] = {{-44, -28}, {-37, -32}, {-28, -32}, {-20, -28}, {-28, -24}, {-37, -24}};
    for (const auto& e : eye) {
        t.emplace_back(e[0], e[1]);
    }
    // Image-right eye, inner corner first, mirrored ordering of the iBUG layout.
    const double eye_r[6][2] = {{20, -28}, {28, -32}, {37, -32}, {44, -28}, {37, -24}, {28, -24}};
    for (const auto& e : eye_r) {
        t.emplace_back(e[0], e[1]);
    }
    const double outer_lip[12][2] = {{-25, 45}, {-16, 40}, {-6, 37.5}, {0, 38.5}, {6, 37.5}, {16, 40},
                                     {25, 45},  {16, 51}, {6, 54},    {0, 55},   {-6, 54},  {-16, 51}};
    for (const auto& p : outer_lip) {
        t.emplace_back(p[0], p[1]);
    }
    const double inner_lip[8][2] = {{-19, 45}, {-8, 42.5}, {0, 42.5}, {8, 42.5},
                                    {19, 45},  {8, 47.5},  {0, 47.5}, {-8, 47.5}};
    for (const auto& p : inner_lip) {
        t.emplace_back(p[0], p[1]);
    }
    return t;
}

geometry::Mesh make_generic_head(const HeadShapeParams& params, HeadGrid grid)
{
    auto reference = build_grid(HeadShapeParams{}, grid);
    const auto landmarks = select_landmarks(reference);
    auto g = build_grid(params, grid);
    g.mesh.landmark_map = landmarks;
    g.mesh.validate(geometry::ibug68::count);
    return std::move(g.mesh);
}

std::vector<HeadShapeParams> generic_shape_family()
{
    std::vector<HeadShapeParams> family(shape_count);
    // width, height, depth, nose height, nose width, eye depth, brow, cheek, mouth, chin, jaw
    const double table[shape_count][11] = {
        {78, 115, 95, 26, 1.000, 8, 4, 3, 6, 6, 0.250},
        {80, 113.5, 93.5, 24.5, 1.075, 7.5, 3.5, 4, 5.5, 5.5, 0.215},
        {76, 116.5, 96.5, 27.5, 0.950, 8.5, 4.5, 2.5, 6.5, 7, 0.275},
        {79, 117.5, 97.5, 26.5, 1.025, 8, 5, 3.5, 6, 6.5, 0.235},
        {76.5, 112.5, 92.5, 24, 0.975, 7, 3.5, 3, 5.5, 5, 0.265},
        {81, 115.5, 95.5, 25.5, 1.100, 8.5, 4, 4.5, 7, 6, 0.200},
        {75, 114, 94, 28, 0.925, 9, 4.5, 2.5, 5.5, 7.5, 0.285},
        {78.5, 118.5, 96, 25, 1.050, 7.5, 4, 3.5, 6.5, 5.5, 0.245},
        {77.5, 111.5, 94.5, 27, 1.000, 8, 5, 3, 5, 6.5, 0.260},
        {79.5, 116, 97, 26, 0.975, 8.5, 3.5, 4, 6, 6, 0.225},
    };
    for (int i = 0; i < shape_count; ++i) {
        const auto& r = table[i];
        family[i] = {r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8], r[9], r[10]};
    }
    return family;
}

ShapeSet make_shape_set(HeadGrid grid)
{
    ShapeSet set;
    for (const auto& params : generic_shape_family()) {
        set.shapes.push_back(make_generic_head(params, grid));
    }
    set.validate();
    return set;
}

BlendshapeBasis make_blendshape_basis(const geometry::Mesh& neutral)
{
    BlendshapeBasis basis;
    basis.neutral = neutral;
    const std::size_t n = neutral.vertices.size();
    for (auto& d : basis.deltas) {
        d.assign(n, Eigen::Vector3d::Zero());
    }
    for (std::size_t v = 0; v < n; ++v) {
        const double x = neutral.vertices[v].x();
        const double y = neutral.vertices[v].y();
        const double ax = std::abs(x);
        const double lower = smoothstep(44.0, 46.5, y);

        auto& open = basis.deltas[static_cast<int>(Expression::mouth_open)][v];
        open.y() += 12.0 * gauss(x / 30.0) * lower;
        open.y() -= 2.0 * gauss(x / 22.0) * gauss((y - 40.0) / 4.0) * (1.0 - lower);
        open.z() += 2.0 * gauss(x / 22.0) * gauss((y - 50.0) / 5.0);

        auto& closed = basis.deltas[static_cast<int>(Expression::mouth_closed)][v];
        closed.y() += 1.5 * gauss(x / 20.0) * gauss((y - 42.5) / 2.0) * (1.0 - lower);
        closed.y() -= 1.5 * gauss(x / 20.0) * gauss((y - 47.5) / 2.0) * lower;
        closed.z() -= 2.0 * gauss(x / 20.0) * gauss((y - 45.0) / 5.0);

        auto& smile = basis.deltas[static_cast<int>(Expression::smile)][v];
        const double corner = gauss((ax - 24.0) / 9.0) * gauss((y - 45.0) / 8.0);
        smile.x() += 5.0 * std::tanh(x / 4.0) * corner;
        smile.y() -= 5.0 * corner;
        smile.z() += 1.0 * corner - 2.0 * gauss((ax - 35.0) / 10.0) * gauss((y - 25.0) / 10.0);
    }
    return basis;
}

} // namespace facesynth::synth
