#include "doctest.h"
#include "support.hpp"

#include "facesynth/error.hpp"
#include "facesynth/geometry/pose_estimation.hpp"
#include "facesynth/geometry/rotation.hpp"
#include "facesynth/render/image.hpp"
#include "facesynth/render/png_io.hpp"
#include "facesynth/render/rasterizer.hpp"
#include "facesynth/synth/generic_head.hpp"
#include "facesynth/synth/synthetic_faces.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <random>

using namespace facesynth;
using namespace facesynth::render;
using geometry::Intrinsics;
using geometry::Mesh;
using geometry::Pose;

namespace {

Pose at_depth(double yaw, double depth)
{
    Pose p;
    p.rotation = geometry::yaw_rotation(yaw);
    p.translation = {0.0, 0.0, depth};
    return p;
}

// Ray from the camera centre to each vertex; occluded when another triangle is hit first.
std::vector<bool> raycast_visibility(const Mesh& mesh, const Pose& pose, double tolerance)
{
    const auto cam = to_camera_space(mesh, pose);
    std::vector<bool> visible(cam.size(), true);
    for (std::size_t v = 0; v < cam.size(); ++v) {
        const Eigen::Vector3d dir = cam[v] / cam[v].z();
        for (const auto& t : mesh.triangles) {
            if (t[0] == int(v) || t[1] == int(v) || t[2] == int(v)) {
                continue;
            }
            const Eigen::Vector3d& a = cam[std::size_t(t[0])];
            const Eigen::Vector3d e1 = cam[std::size_t(t[1])] - a;
            const Eigen::Vector3d e2 = cam[std::size_t(t[2])] - a;
            const Eigen::Vector3d h = dir.cross(e2);
            const double det = e1.dot(h);
            if (std::abs(det) < 1e-12) {
                continue;
            }
            const Eigen::Vector3d s = -a;
            const double u = s.dot(h) / det;
            const Eigen::Vector3d q = s.cross(e1);
            const double w = dir.dot(q) / det;
            if (u < 0.0 || w < 0.0 || u + w > 1.0) {
                continue;
            }
            const double depth = e2.dot(q) / det;
            if (depth > 0.0 && depth < cam[v].z() - tolerance) {
                visible[v] = false;
                break;
            }
        }
    }
    return visible;
}

// Front half of an ellipsoid on a cols x rows grid, optionally with a Gaussian nose bump toward the viewer.
Mesh shell(int cols, int rows, double half_width, double half_height, double half_depth, double nose)
{
    Mesh m;
    for (int r = 0; r < rows; ++r) {
        const double phi = -M_PI / 2 + M_PI * (r + 0.5) / rows;
        for (int c = 0; c < cols; ++c) {
            const double theta = -M_PI / 2 + M_PI * c / (cols - 1);
            const double x = half_width * std::cos(phi) * std::sin(theta);
            const double y = half_height * std::sin(phi);
            double z = -half_depth * std::cos(phi) * std::cos(theta);
            z -= nose * std::exp(-(x * x + y * y) / (2.0 * 15.0 * 15.0));
            m.vertices.emplace_back(x, y, z);
        }
    }
    for (int r = 0; r + 1 < rows; ++r) {
        for (int c = 0; c + 1 < cols; ++c) {
            const int i = r * cols + c;
            m.triangles.push_back({i, i + 1, i + cols});
            m.triangles.push_back({i + 1, i + cols + 1, i + cols});
        }
    }
    return m;
}

RasterImage constant_image(int w, int h, float value)
{
    return RasterImage(w, h, 3, value);
}

} // namespace

TEST_CASE("texture coordinates")
{
    Mesh m;
    m.vertices = {{0, 0, 0}, {10, 0, 0}, {0, 10, 0}};
    m.triangles = {{0, 1, 2}};
    const auto K = Intrinsics::centered(100.0, {64, 64});
    const auto src = constant_image(64, 64, 10.0f);
    auto tc = texture_from_image(m, src, at_depth(0.0, 100.0), K);
    CHECK((tc.uv[0] - K.principal_point).norm() < 1e-12);
    CHECK(tc.valid_count() == 3);

    Pose behind = at_depth(0.0, -50.0);
    tc = texture_from_image(m, src, behind, K);
    CHECK(tc.valid_count() == 0);

    const auto& head = test::generic_head();
    const auto big = constant_image(256, 256, 1.0f);
    const auto KK = Intrinsics::centered(500.0, {256, 256});
    const Pose pose = at_depth(25.0, 700.0);
    tc = texture_from_image(head, big, pose, KK);
    double worst = 0.0;
    for (std::size_t v = 0; v < head.num_vertices(); ++v) {
        const auto p = geometry::project_camera_point(pose.to_camera(head.vertices[v]), KK);
        worst = std::max(worst, (*p - tc.uv[v]).norm());
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("constant-colour triangle renders exactly")
{
    Mesh m;
    m.vertices = {{-8, -8, 0}, {8, -8, 0}, {-8, 8, 0}};
    m.triangles = {{0, 1, 2}};
    const auto K = Intrinsics::centered(10.0, {32, 32});
    const auto src = constant_image(32, 32, 123.0f);
    const Pose pose = at_depth(0.0, 10.0);
    const auto out = rasterize(m, texture_from_image(m, src, pose, K), src, pose, K);
    REQUIRE(out.mask_area() > 50);
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            const std::size_t i = std::size_t(y) * 32 + std::size_t(x);
            for (int c = 0; c < 3; ++c) {
                CHECK(out.image.at(x, y, c) == (out.mask[i] ? 123.0f : 0.0f));
            }
        }
    }
}

TEST_CASE("z-buffer keeps the nearer triangle")
{
    Mesh m;
    // Near triangle at depth 5, far one at depth 10, both covering the image centre.
    m.vertices = {{-4, -4, 5}, {4, -4, 5}, {0, 4, 5}, {-8, -8, 10}, {8, -8, 10}, {0, 8, 10}};
    m.triangles = {{0, 1, 2}, {3, 4, 5}};
    const auto K = Intrinsics::centered(20.0, {41, 41});
    RasterImage src(41, 41, 1);
    for (int y = 0; y < 41; ++y) {
        for (int x = 0; x < 41; ++x) {
            src.at(x, y, 0) = x < 20 ? 50.0f : 200.0f;
        }
    }
    geometry::Pose identity;
    TexCoords tc;
    tc.uv = {{2, 2}, {2, 2}, {2, 2}, {38, 38}, {38, 38}, {38, 38}};
    tc.valid.assign(6, true);
    const auto out = rasterize(m, tc, src, identity, K);
    const auto near_only = rasterize_fragments(to_camera_space(m, identity), std::vector<std::array<int, 3>>{{0, 1, 2}}, K);
    int overlapped = 0;
    for (std::size_t i = 0; i < out.mask.size(); ++i) {
        if (near_only.covered(i)) {
            ++overlapped;
            CHECK(out.image.data()[i] == 50.0f);
            CHECK(out.depth[i] == doctest::Approx(5.0));
        }
    }
    CHECK(overlapped > 20);
}

TEST_CASE("occluded vertex is invisible")
{
    Mesh m;
    m.vertices = {{-3, -3, 1}, {3, -3, 1}, {0, 3, 1}, {-0.5, -0.5, 2}, {0.5, -0.5, 2}, {0, 0.5, 2}};
    m.triangles = {{0, 1, 2}, {3, 4, 5}};
    const auto K = Intrinsics::centered(20.0, {64, 64});
    const auto vis = vertex_visibility(m, geometry::Pose{}, K, 1e-6);
    CHECK(vis == std::vector<bool>{true, true, true, false, false, false});
}

TEST_CASE("visibility agrees with a ray-cast oracle at profile")
{
    const Mesh mesh = shell(25, 20, 78.0, 115.0, 95.0, 30.0);
    REQUIRE(mesh.num_vertices() == 500);
    const auto K = Intrinsics::centered(500.0, {256, 256});
    for (double yaw : {0.0, 35.0, 70.0, -70.0}) {
        const Pose pose = at_depth(yaw, 700.0);
        const double tol = default_depth_tolerance(mesh);
        const auto fast = vertex_visibility(mesh, pose, K, tol);
        const auto slow = raycast_visibility(mesh, pose, tol);
        int agree = 0;
        for (std::size_t v = 0; v < fast.size(); ++v) {
            agree += fast[v] == slow[v];
        }
        INFO("yaw " << yaw);
        CHECK(agree >= 495);
    }
    // At +70 the model's -x cheek faces away from the camera.
    const auto vis = vertex_visibility(mesh, at_depth(70.0, 700.0), K);
    int far_side = 0;
    int far_hidden = 0;
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
        if (mesh.vertices[v].x() < -50.0) {
            ++far_side;
            far_hidden += !vis[v];
        }
    }
    REQUIRE(far_side > 0);
    CHECK(far_hidden > far_side / 2);
}

TEST_CASE("render round trip at the estimated source pose")
{
    const auto& material = test::generic_head();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int c = 0; c < 5; ++c) {
        const auto id = synth::random_identity(100 + std::uint64_t(c));
        const auto mesh = synth::make_generic_head(id.shape);
        synth::SyntheticCamera cam;
        cam.yaw = 75.0 * u(rng);
        cam.pitch = 10.0 * u(rng);
        cam.roll = 8.0 * u(rng);
        const auto face = synth::render_synthetic_face(mesh, material, id.appearance, cam);
        const auto pe = geometry::estimate_pose(face.landmarks, mesh, {256, 256});
        const auto tex = texture_from_image(mesh, face.image, pe.pose, pe.intrinsics);
        const auto r = rasterize(mesh, tex, face.image, pe.pose, pe.intrinsics);
        std::vector<std::uint8_t> visible(r.mask.size());
        for (std::size_t i = 0; i < visible.size(); ++i) {
            visible[i] = r.mask[i] && r.direct_valid[i] && r.mirror_weight[i] == 0.0f;
        }
        CHECK(mean_absolute_error(r.image, face.image, visible) < 2.0);
    }
}

TEST_CASE("render output invariants")
{
    const auto& head = test::generic_head();
    const auto K = Intrinsics::centered(500.0, {256, 256});
    RasterImage src(256, 256, 3);
    std::mt19937 rng(9);
    std::uniform_real_distribution<float> u(0.0f, 255.0f);
    for (auto& v : src.data()) {
        v = u(rng);
    }
    const auto tc = texture_from_image(head, src, at_depth(20.0, 700.0), K);
    const auto a = rasterize(head, tc, src, at_depth(-45.0, 700.0), K);
    const auto b = rasterize(head, tc, src, at_depth(-45.0, 700.0), K);
    CHECK(a.image == b.image);
    CHECK(a.mask == b.mask);
    for (std::size_t i = 0; i < a.mask.size(); ++i) {
        CHECK((a.mask[i] == 1) == std::isfinite(a.depth[i]));
        if (!a.mask[i]) {
            for (int c = 0; c < 3; ++c) {
                CHECK(a.image.data()[i * 3 + std::size_t(c)] == 0.0f);
            }
        }
    }
}

TEST_CASE("mask area shrinks as a convex head turns")
{
    const Mesh head = shell(81, 81, 78.0, 115.0, 70.0, 0.0);
    const auto K = Intrinsics::centered(500.0, {256, 256});
    std::size_t previous = std::numeric_limits<std::size_t>::max();
    for (int yaw = 0; yaw <= 75; yaw += 5) {
        const auto fb = rasterize_fragments(to_camera_space(head, at_depth(yaw, 700.0)), head.triangles, K);
        std::size_t area = 0;
        for (std::size_t i = 0; i < fb.triangle.size(); ++i) {
            area += fb.covered(i);
        }
        INFO("yaw " << yaw);
        CHECK(area <= previous);
        previous = area;
    }
}

TEST_CASE("soft symmetry fill")
{
    const auto& head = test::generic_head();
    const auto K = Intrinsics::centered(500.0, {256, 256});
    const Pose frontal = at_depth(0.0, 700.0);
    // Texture mirror-symmetric about the principal point column.
    RasterImage src(256, 256, 3);
    for (int y = 0; y < 256; ++y) {
        for (int x = 0; x < 256; ++x) {
            const int d = std::abs(2 * x - 255);
            for (int c = 0; c < 3; ++c) {
                src.at(x, y, c) = float((d * 7 + y * 3 + c * 40) % 256);
            }
        }
    }
    const auto full_tc = texture_from_image(head, src, frontal, K);
    const auto full = rasterize(head, full_tc, src, frontal, K);

    SUBCASE("fully valid input is unchanged")
    {
        auto in = full;
        in.direct_valid = in.mask;
        const auto out = soft_symmetry_fill(in, head, full_tc, src);
        CHECK(out.image == in.image);
        CHECK(out.mask == in.mask);
    }
    SUBCASE("invalid half is filled from its mirror")
    {
        auto half_tc = full_tc;
        for (std::size_t v = 0; v < head.num_vertices(); ++v) {
            if (head.vertices[v].x() < -1.0) {
                half_tc.valid[v] = false;
            }
        }
        const auto out = rasterize(head, half_tc, src, frontal, K);
        int filled = 0;
        double worst = 0.0;
        for (std::size_t i = 0; i < out.mask.size(); ++i) {
            if (out.mask[i] && full.mask[i] && full.direct_valid[i]) {
                filled += out.mirror_weight[i] == 1.0f;
                for (int c = 0; c < 3; ++c) {
                    worst = std::max(worst, double(std::abs(out.image.data()[i * 3 + std::size_t(c)] -
                                                            full.image.data()[i * 3 + std::size_t(c)])));
                }
            }
        }
        CHECK(filled > 5000);
        CHECK(worst < 0.05);
    }
    SUBCASE("pixels invalid on both sides stay background")
    {
        auto none = full_tc;
        none.valid.assign(none.valid.size(), false);
        const auto out = rasterize(head, none, src, frontal, K);
        CHECK(out.mask_area() == 0);
        for (float v : out.image.data()) {
            CHECK(v == 0.0f);
        }
    }
    SUBCASE("missing symmetry map skips the fill")
    {
        Mesh bare = head;
        bare.symmetry_map.clear();
        auto half_tc = full_tc;
        for (std::size_t v = 0; v < head.num_vertices(); ++v) {
            half_tc.valid[v] = head.vertices[v].x() >= 0.0 && half_tc.valid[v];
        }
        const auto out = rasterize(bare, half_tc, src, frontal, K);
        CHECK(out.symmetry_skipped);
        CHECK(out.mask_area() < full.mask_area());
    }
}

TEST_CASE("PNG round trip")
{
    test::TempDir dir("png");
    RasterImage rgb(7, 5, 3);
    RasterImage gray(4, 3, 1);
    int k = 0;
    for (auto& v : rgb.data()) {
        v = float((k++ * 37) % 256);
    }
    for (auto& v : gray.data()) {
        v = float((k++ * 11) % 256);
    }
    write_png((dir / "rgb.png").string(), rgb);
    write_png((dir / "g.png").string(), gray);
    CHECK(read_png((dir / "rgb.png").string()) == rgb);
    CHECK(read_png((dir / "g.png").string()) == gray);

    std::vector<std::uint8_t> alpha(35);
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        alpha[i] = i % 3 == 0 ? 255 : 0;
    }
    write_png((dir / "a.png").string(), rgb, alpha);
    std::vector<std::uint8_t> back;
    CHECK(read_png((dir / "a.png").string(), &back) == rgb);
    CHECK(back == alpha);
    CHECK_THROWS_AS(read_png((dir / "missing.png").string()), Error);
}

TEST_CASE("image operations")
{
    RasterImage img(8, 6, 3, 77.0f);
    const auto g = to_gray(img);
    CHECK(g.channels() == 1);
    CHECK(g.at(3, 3, 0) == doctest::Approx(77.0f));
    const auto small = resize_area(img, 4, 3);
    for (float v : small.data()) {
        CHECK(v == doctest::Approx(77.0f));
    }
    RasterImage ramp(6, 1, 1);
    for (int x = 0; x < 6; ++x) {
        ramp.at(x, 0, 0) = float(x);
    }
    const auto half = resize_area(ramp, 3, 1);
    CHECK(half.at(0, 0, 0) == doctest::Approx(0.5f));
    CHECK(half.at(2, 0, 0) == doctest::Approx(4.5f));

    RasterImage noise(16, 16, 3);
    std::mt19937 rng(2);
    std::uniform_real_distribution<float> u(0.0f, 255.0f);
    for (auto& v : noise.data()) {
        v = u(rng);
    }
    const auto same = warp_similarity(noise, geometry::Similarity2D{}, 16, 16);
    CHECK(mean_absolute_error(same, noise) < 1e-4);

    RasterImage q(2, 1, 1);
    q.at(0, 0, 0) = 12.6f;
    q.at(1, 0, 0) = 300.0f;
    quantize(q);
    CHECK(q.at(0, 0, 0) == 13.0f);
    CHECK(q.at(1, 0, 0) == 255.0f);

    RasterImage a(2, 1, 1, 0.0f);
    RasterImage b(2, 1, 1, 0.0f);
    b.at(1, 0, 0) = 10.0f;
    const std::vector<std::uint8_t> mask{1, 0};
    CHECK(mean_absolute_error(a, b) == doctest::Approx(5.0));
    CHECK(mean_absolute_error(a, b, mask) == doctest::Approx(0.0));
}
