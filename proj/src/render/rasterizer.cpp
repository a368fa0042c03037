#include "facesynth/render/rasterizer.hpp"

#include "facesynth/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace facesynth::render {

namespace {

constexpr double near_plane = 1e-9;
constexpr double inside_epsilon = 1e-9;

double edge(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& p) noexcept
{
    return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}

Eigen::Vector2d project_unchecked(const Eigen::Vector3d& x, const geometry::Intrinsics& k) noexcept
{
    return k.principal_point + k.focal * x.head<2>() / x.z();
}

} // namespace

std::vector<Eigen::Vector3d> to_camera_space(const geometry::Mesh& mesh, const geometry::Pose& pose)
{
    std::vector<Eigen::Vector3d> out;
    out.reserve(mesh.vertices.size());
    for (const auto& v : mesh.vertices) {
        out.push_back(pose.to_camera(v));
    }
    return out;
}

FragmentBuffer rasterize_fragments(std::span<const Eigen::Vector3d> camera_points,
                                   std::span<const std::array<int, 3>> triangles,
                                   const geometry::Intrinsics& intrinsics)
{
    FragmentBuffer fb;
    fb.width = intrinsics.image_size.width;
    fb.height = intrinsics.image_size.height;
    const std::size_t n = static_cast<std::size_t>(fb.width) * fb.height;
    fb.depth.assign(n, std::numeric_limits<double>::infinity());
    fb.triangle.assign(n, -1);
    fb.weights.assign(n, Eigen::Vector3d::Zero());

    for (std::size_t t = 0; t < triangles.size(); ++t) {
        const auto& tri = triangles[t];
        const Eigen::Vector3d& a = camera_points[tri[0]];
        const Eigen::Vector3d& b = camera_points[tri[1]];
        const Eigen::Vector3d& c = camera_points[tri[2]];
        if (a.z() <= near_plane || b.z() <= near_plane || c.z() <= near_plane) {
            continue;
        }
        const Eigen::Vector2d pa = project_unchecked(a, intrinsics);
        const Eigen::Vector2d pb = project_unchecked(b, intrinsics);
        const Eigen::Vector2d pc = project_unchecked(c, intrinsics);
        const double area = edge(pa, pb, pc);
        if (std::abs(area) < 1e-12) {
            continue;
        }
        const int x0 = std::max(0, static_cast<int>(std::ceil(std::min({pa.x(), pb.x(), pc.x()}) - inside_epsilon)));
        const int x1 = std::min(fb.width - 1, static_cast<int>(std::floor(std::max({pa.x(), pb.x(), pc.x()}) + inside_epsilon)));
        const int y0 = std::max(0, static_cast<int>(std::ceil(std::min({pa.y(), pb.y(), pc.y()}) - inside_epsilon)));
        const int y1 = std::min(fb.height - 1, static_cast<int>(std::floor(std::max({pa.y(), pb.y(), pc.y()}) + inside_epsilon)));
        const Eigen::Vector3d inv_z(1.0 / a.z(), 1.0 / b.z(), 1.0 / c.z());
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const Eigen::Vector2d q(x, y);
                const double l0 = edge(pb, pc, q) / area;
                const double l1 = edge(pc, pa, q) / area;
                const double l2 = 1.0 - l0 - l1;
                if (l0 < -inside_epsilon || l1 < -inside_epsilon || l2 < -inside_epsilon) {
                    continue;
                }
                const Eigen::Vector3d w = Eigen::Vector3d(l0, l1, l2).cwiseProduct(inv_z);
                const double sum = w.sum();
                const double depth = 1.0 / sum;
                const std::size_t i = fb.index(x, y);
                if (depth < fb.depth[i]) {
                    fb.depth[i] = depth;
                    fb.triangle[i] = static_cast<int>(t);
                    fb.weights[i] = w / sum;
                }
            }
        }
    }
    return fb;
}

double default_depth_tolerance(const geometry::Mesh& mesh)
{
    return 1e-3 * mesh.depth_extent();
}

std::vector<bool> vertex_visibility(const geometry::Mesh& mesh, const geometry::Pose& pose,
                                    const geometry::Intrinsics& intrinsics, double depth_tolerance)
{
    if (depth_tolerance < 0.0) {
        depth_tolerance = default_depth_tolerance(mesh);
    }
    const auto cam = to_camera_space(mesh, pose);
    const std::size_t nv = cam.size();
    std::vector<Eigen::Vector2d> screen(nv);
    std::vector<bool> in_front(nv);
    double min_x = std::numeric_limits<double>::infinity();
    double min_y = min_x;
    double max_x = -min_x;
    double max_y = -min_x;
    for (std::size_t v = 0; v < nv; ++v) {
        in_front[v] = cam[v].z() > near_plane;
        if (in_front[v]) {
            screen[v] = project_unchecked(cam[v], intrinsics);
            min_x = std::min(min_x, screen[v].x());
            min_y = std::min(min_y, screen[v].y());
            max_x = std::max(max_x, screen[v].x());
            max_y = std::max(max_y, screen[v].y());
        }
    }
    std::vector<bool> visible(nv, false);
    if (!(max_x >= min_x)) {
        return visible;
    }

    // Uniform grid over the projected extent; each cell lists the triangles
    // whose screen bounding box touches it.
    const double extent = std::max(max_x - min_x, max_y - min_y);
    const int cells = 128;
    const double cell = std::max(extent / cells, 1e-9);
    const int gx = std::min(cells, static_cast<int>((max_x - min_x) / cell) + 1);
    const int gy = std::min(cells, static_cast<int>((max_y - min_y) / cell) + 1);
    auto cell_of = [&](double v, double lo, int g) {
        return std::clamp(static_cast<int>((v - lo) / cell), 0, g - 1);
    };
    std::vector<std::vector<int>> grid(static_cast<std::size_t>(gx) * gy);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        if (!in_front[tri[0]] || !in_front[tri[1]] || !in_front[tri[2]]) {
            continue;
        }
        const auto& a = screen[tri[0]];
        const auto& b = screen[tri[1]];
        const auto& c = screen[tri[2]];
        const int cx0 = cell_of(std::min({a.x(), b.x(), c.x()}), min_x, gx);
        const int cx1 = cell_of(std::max({a.x(), b.x(), c.x()}), min_x, gx);
        const int cy0 = cell_of(std::min({a.y(), b.y(), c.y()}), min_y, gy);
        const int cy1 = cell_of(std::max({a.y(), b.y(), c.y()}), min_y, gy);
        for (int cy = cy0; cy <= cy1; ++cy) {
            for (int cx = cx0; cx <= cx1; ++cx) {
                grid[static_cast<std::size_t>(cy) * gx + cx].push_back(static_cast<int>(t));
            }
        }
    }

    for (std::size_t v = 0; v < nv; ++v) {
        if (!in_front[v]) {
            continue;
        }
        const auto& p = screen[v];
        const auto& bucket = grid[static_cast<std::size_t>(cell_of(p.y(), min_y, gy)) * gx + cell_of(p.x(), min_x, gx)];
        bool occluded = false;
        for (int t : bucket) {
            const auto& tri = mesh.triangles[t];
            if (tri[0] == static_cast<int>(v) || tri[1] == static_cast<int>(v) || tri[2] == static_cast<int>(v)) {
                continue;
            }
            const auto& a = screen[tri[0]];
            const auto& b = screen[tri[1]];
            const auto& c = screen[tri[2]];
            const double area = edge(a, b, c);
            if (std::abs(area) < 1e-12) {
                continue;
            }
            const double l0 = edge(b, c, p) / area;
            const double l1 = edge(c, a, p) / area;
            const double l2 = 1.0 - l0 - l1;
            if (l0 < -inside_epsilon || l1 < -inside_epsilon || l2 < -inside_epsilon) {
                continue;
            }
            const double inv_depth = l0 / cam[tri[0]].z() + l1 / cam[tri[1]].z() + l2 / cam[tri[2]].z();
            if (1.0 / inv_depth < cam[v].z() - depth_tolerance) {
                occluded = true;
                break;
            }
        }
        visible[v] = !occluded;
    }
    return visible;
}

geometry::LandmarkSet2D project_landmarks(const geometry::Mesh& mesh, const geometry::Pose& pose,
                                          const geometry::Intrinsics& intrinsics)
{
    const auto visible = vertex_visibility(mesh, pose, intrinsics);
    const int n = static_cast<int>(mesh.landmark_map.size());
    geometry::LandmarkSet2D out;
    out.points.assign(n, Eigen::Vector2d::Zero());
    out.visible.assign(n, false);
    const double w = intrinsics.image_size.width - 1.0;
    const double h = intrinsics.image_size.height - 1.0;
    for (int s = 0; s < n; ++s) {
        const int v = mesh.landmark_map[s];
        const auto p = geometry::project_camera_point(pose.to_camera(mesh.vertices[v]), intrinsics);
        if (!p) {
            continue;
        }
        out.points[s] = *p;
        out.visible[s] = visible[v] && p->x() >= 0.0 && p->y() >= 0.0 && p->x() <= w && p->y() <= h;
    }
    return out;
}

std::size_t TexCoords::valid_count() const noexcept
{
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), true));
}

TexCoords texture_from_image(const geometry::Mesh& mesh, const RasterImage& source, const geometry::Pose& source_pose,
                             const geometry::Intrinsics& intrinsics)
{
    const auto visible = vertex_visibility(mesh, source_pose, intrinsics);
    TexCoords tc;
    tc.uv.assign(mesh.vertices.size(), Eigen::Vector2d::Zero());
    tc.valid.assign(mesh.vertices.size(), false);
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        const auto p = geometry::project_camera_point(source_pose.to_camera(mesh.vertices[v]), intrinsics);
        if (!p) {
            continue;
        }
        tc.uv[v] = *p;
        tc.valid[v] = visible[v] && source.inside(p->x(), p->y());
    }
    return tc;
}

std::size_t RenderOutput::mask_area() const noexcept
{
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

RenderOutput soft_symmetry_fill(RenderOutput out, const geometry::Mesh& mesh, const TexCoords& texcoords,
                                const RasterImage& source, int band)
{
    const auto& fb = out.fragments;
    const std::size_t n = static_cast<std::size_t>(fb.width) * fb.height;
    const int channels = out.image.channels();
    if (out.mirror_weight.size() != n) {
        out.mirror_weight.assign(n, 0.0f);
    }

    auto drop_pixel = [&](std::size_t i) {
        out.mask[i] = 0;
        out.depth[i] = std::numeric_limits<float>::infinity();
        float* px = out.image.data().data() + i * channels;
        std::fill(px, px + channels, 0.0f);
    };

    bool any_hole = false;
    for (std::size_t i = 0; i < n; ++i) {
        any_hole = any_hole || (fb.covered(i) && !out.direct_valid[i]);
    }
    if (!any_hole) {
        return out;
    }
    if (!mesh.has_symmetry()) {
        out.symmetry_skipped = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (fb.covered(i) && !out.direct_valid[i]) {
                drop_pixel(i);
            }
        }
        return out;
    }

    // Mirrored sample wherever the mirrored triangle is fully textured.
    std::vector<std::uint8_t> mirror_ok(n, 0);
    std::vector<float> mirror(n * channels, 0.0f);
    for (std::size_t i = 0; i < n; ++i) {
        if (!fb.covered(i)) {
            continue;
        }
        const auto& tri = mesh.triangles[fb.triangle[i]];
        const int m0 = mesh.symmetry_map[tri[0]];
        const int m1 = mesh.symmetry_map[tri[1]];
        const int m2 = mesh.symmetry_map[tri[2]];
        if (!texcoords.valid[m0] || !texcoords.valid[m1] || !texcoords.valid[m2]) {
            continue;
        }
        const auto& w = fb.weights[i];
        const Eigen::Vector2d uv = w[0] * texcoords.uv[m0] + w[1] * texcoords.uv[m1] + w[2] * texcoords.uv[m2];
        sample_bilinear(source, uv.x(), uv.y(), mirror.data() + i * channels);
        mirror_ok[i] = 1;
    }

    // Chessboard distance from each valid face pixel to the nearest hole.
    std::vector<int> distance(n, std::numeric_limits<int>::max());
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < n; ++i) {
        if (fb.covered(i) && !out.direct_valid[i]) {
            distance[i] = 0;
            queue.push_back(i);
        }
    }
    while (!queue.empty()) {
        const std::size_t i = queue.front();
        queue.pop_front();
        if (distance[i] >= band) {
            continue;
        }
        const int x = static_cast<int>(i % fb.width);
        const int y = static_cast<int>(i / fb.width);
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int nx = x + dx;
                const int ny = y + dy;
                if (nx < 0 || ny < 0 || nx >= fb.width || ny >= fb.height) {
                    continue;
                }
                const std::size_t j = fb.index(nx, ny);
                if (fb.covered(j) && distance[j] > distance[i] + 1) {
                    distance[j] = distance[i] + 1;
                    queue.push_back(j);
                }
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (!fb.covered(i)) {
            continue;
        }
        float* px = out.image.data().data() + i * channels;
        const float* mx = mirror.data() + i * channels;
        if (!out.direct_valid[i]) {
            if (mirror_ok[i]) {
                std::copy(mx, mx + channels, px);
                out.mirror_weight[i] = 1.0f;
            } else {
                drop_pixel(i);
            }
        } else if (mirror_ok[i] && distance[i] <= band) {
            const float alpha = static_cast<float>(distance[i]) / static_cast<float>(band + 1);
            for (int c = 0; c < channels; ++c) {
                px[c] = alpha * px[c] + (1.0f - alpha) * mx[c];
            }
            out.mirror_weight[i] = 1.0f - alpha;
        }
    }
    return out;
}

RenderOutput rasterize(const geometry::Mesh& mesh, const TexCoords& texcoords, const RasterImage& source,
                       const geometry::Pose& target_pose, const geometry::Intrinsics& intrinsics, int band)
{
    if (texcoords.uv.size() != mesh.vertices.size() || texcoords.valid.size() != mesh.vertices.size()) {
        throw Error(ErrorCode::dimension_mismatch, "texture coordinates do not match the mesh");
    }
    const auto cam = to_camera_space(mesh, target_pose);
    RenderOutput out;
    out.fragments = rasterize_fragments(cam, mesh.triangles, intrinsics);
    const auto& fb = out.fragments;
    const std::size_t n = static_cast<std::size_t>(fb.width) * fb.height;
    const int channels = source.channels();
    out.image = RasterImage(fb.width, fb.height, channels);
    out.mask.assign(n, 0);
    out.depth.assign(n, std::numeric_limits<float>::infinity());
    out.direct_valid.assign(n, 0);
    out.mirror_weight.assign(n, 0.0f);

    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (!fb.covered(i)) {
            continue;
        }
        any = true;
        out.mask[i] = 1;
        out.depth[i] = static_cast<float>(fb.depth[i]);
        const auto& tri = mesh.triangles[fb.triangle[i]];
        if (!texcoords.valid[tri[0]] || !texcoords.valid[tri[1]] || !texcoords.valid[tri[2]]) {
            continue;
        }
        const auto& w = fb.weights[i];
        const Eigen::Vector2d uv = w[0] * texcoords.uv[tri[0]] + w[1] * texcoords.uv[tri[1]] + w[2] * texcoords.uv[tri[2]];
        sample_bilinear(source, uv.x(), uv.y(), out.image.data().data() + i * channels);
        out.direct_valid[i] = 1;
    }
    out.empty = !any;
    if (out.empty) {
        return out;
    }
    return soft_symmetry_fill(std::move(out), mesh, texcoords, source, band);
}

} // namespace facesynth::render
