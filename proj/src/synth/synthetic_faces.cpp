#include "facesynth/synth/synthetic_faces.hpp"

#include "facesynth/error.hpp"
#include "facesynth/geometry/rotation.hpp"
#include "facesynth/render/rasterizer.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <random>

namespace facesynth::synth {

namespace {

double smooth_falloff(double r)
{
    // 1 inside r < 0.8, 0 beyond 1, smooth in between.
    const double t = std::clamp((1.0 - r) / 0.2, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

struct Layout
{
    Eigen::Vector2d eye[2];
    double eye_half_width = 10.0;
    Eigen::Vector2d brow[2];
    double brow_half_width = 20.0;
    Eigen::Vector2d mouth;
    double mouth_half_width = 20.0;
    double mouth_half_height = 6.0;
};

Eigen::Vector2d centroid(const geometry::Mesh& m, int first, int last)
{
    Eigen::Vector2d s = Eigen::Vector2d::Zero();
    for (int i = first; i <= last; ++i) {
        s += m.landmark(i).head<2>();
    }
    return s / static_cast<double>(last - first + 1);
}

Layout make_layout(const geometry::Mesh& material)
{
    Layout l;
    l.eye[0] = centroid(material, 36, 41);
    l.eye[1] = centroid(material, 42, 47);
    l.eye_half_width = 0.5 * (material.landmark(39) - material.landmark(36)).head<2>().norm();
    l.brow[0] = centroid(material, 17, 21);
    l.brow[1] = centroid(material, 22, 26);
    l.brow_half_width = 0.5 * (material.landmark(21) - material.landmark(17)).head<2>().norm();
    l.mouth = centroid(material, 48, 59);
    l.mouth_half_width = 0.5 * (material.landmark(54) - material.landmark(48)).head<2>().norm() + 2.0;
    l.mouth_half_height = 0.5 * std::abs(material.landmark(57).y() - material.landmark(51).y()) + 2.0;
    return l;
}

Eigen::Vector3d albedo(const Eigen::Vector2d& p, const FaceAppearance& a, const Layout& l)
{
    Eigen::Vector3d c = a.skin;
    for (const auto& b : a.blobs) {
        c += b.colour * std::exp(-(p - b.centre).squaredNorm() / (2.0 * b.sigma * b.sigma));
    }
    c += Eigen::Vector3d::Constant(a.pattern_amplitude * std::sin(a.pattern_frequency.x() * p.x() + a.pattern_phase) *
                                   std::sin(a.pattern_frequency.y() * p.y() + 0.5 * a.pattern_phase));
    for (int s = 0; s < 2; ++s) {
        const Eigen::Vector2d bd = p - l.brow[s];
        const double rb = std::hypot(bd.x() / l.brow_half_width, bd.y() / a.brow_thickness);
        c += smooth_falloff(rb) * (a.brows - c);
        const Eigen::Vector2d ed = p - l.eye[s];
        const double re = std::hypot(ed.x() / l.eye_half_width, ed.y() / (0.5 * l.eye_half_width));
        c += smooth_falloff(re) * (Eigen::Vector3d(235.0, 235.0, 230.0) - c);
        const double ri = ed.norm() / (0.45 * l.eye_half_width);
        c += smooth_falloff(ri) * (a.iris - c);
    }
    const Eigen::Vector2d md = p - l.mouth;
    const double rm = std::hypot(md.x() / l.mouth_half_width, md.y() / l.mouth_half_height);
    c += smooth_falloff(rm) * (a.lips - c);
    return c;
}

Eigen::Vector3d uniform_colour(std::mt19937_64& rng, double lo, double hi)
{
    std::uniform_real_distribution<double> u(lo, hi);
    return {u(rng), u(rng), u(rng)};
}

} // namespace

SyntheticIdentity random_identity(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SyntheticIdentity id;
    HeadShapeParams& s = id.shape;
    s.half_width *= 1.0 + 0.06 * u(rng);
    s.half_height *= 1.0 + 0.05 * u(rng);
    s.half_depth *= 1.0 + 0.06 * u(rng);
    s.nose_height *= 1.0 + 0.25 * u(rng);
    s.nose_width *= 1.0 + 0.2 * u(rng);
    s.eye_depth *= 1.0 + 0.25 * u(rng);
    s.brow *= 1.0 + 0.3 * u(rng);
    s.cheek *= 1.0 + 0.3 * u(rng);
    s.chin *= 1.0 + 0.3 * u(rng);
    s.jaw_narrowing = std::clamp(s.jaw_narrowing + 0.08 * u(rng), 0.0, 0.6);

    FaceAppearance& a = id.appearance;
    const double tone = 110.0 + 50.0 * (u(rng) + 1.0);
    a.skin = Eigen::Vector3d(tone, 0.8 * tone, 0.7 * tone) + uniform_colour(rng, -12.0, 12.0);
    a.lips = Eigen::Vector3d(0.85 * tone, 0.45 * tone, 0.45 * tone) + uniform_colour(rng, -15.0, 15.0);
    a.iris = uniform_colour(rng, 20.0, 120.0);
    a.brows = 0.35 * a.skin + uniform_colour(rng, 0.0, 30.0);
    a.brow_thickness = 2.5 + 1.5 * (u(rng) + 1.0);
    const int blob_count = 8;
    for (int i = 0; i < blob_count; ++i) {
        FaceAppearance::Blob b;
        b.centre = Eigen::Vector2d(60.0 * u(rng), 10.0 + 70.0 * u(rng));
        b.sigma = 10.0 + 6.0 * (u(rng) + 1.0);
        b.colour = Eigen::Vector3d::Constant(60.0 * u(rng)) + uniform_colour(rng, -10.0, 10.0);
        a.blobs.push_back(b);
    }
    a.pattern_amplitude = 4.0 + 4.0 * (u(rng) + 1.0);
    a.pattern_frequency = Eigen::Vector2d(0.06 + 0.03 * (u(rng) + 1.0), 0.05 + 0.03 * (u(rng) + 1.0));
    a.pattern_phase = 3.14159 * u(rng);
    return id;
}

geometry::Pose synthetic_pose(const geometry::Mesh& mesh, const SyntheticCamera& camera)
{
    Eigen::Vector3d centre = Eigen::Vector3d::Zero();
    for (int s = 0; s < static_cast<int>(mesh.landmark_map.size()); ++s) {
        centre += mesh.landmark(s);
    }
    centre /= static_cast<double>(std::max<std::size_t>(1, mesh.landmark_map.size()));
    centre.z() = 0.0;
    geometry::Pose pose;
    pose.rotation = geometry::compose_rotation(camera.yaw, camera.pitch, camera.roll);
    const Eigen::Vector3d shift(camera.offset.x() * camera.distance / camera.focal,
                                camera.offset.y() * camera.distance / camera.focal, camera.distance);
    pose.translation = shift - pose.rotation * centre;
    return pose;
}

SyntheticFace render_synthetic_face(const geometry::Mesh& mesh, const geometry::Mesh& material,
                                    const FaceAppearance& appearance, const SyntheticCamera& camera)
{
    if (material.vertices.size() != mesh.vertices.size()) {
        throw Error(ErrorCode::invalid_input, "material mesh does not match the rendered mesh");
    }
    SyntheticFace out;
    out.intrinsics = geometry::Intrinsics::centered(camera.focal, {camera.width, camera.height});
    out.pose = synthetic_pose(mesh, camera);
    const auto cam = render::to_camera_space(mesh, out.pose);
    const auto frags = render::rasterize_fragments(cam, mesh.triangles, out.intrinsics);

    std::vector<Eigen::Vector3d> normals(mesh.vertices.size(), Eigen::Vector3d::Zero());
    for (const auto& t : mesh.triangles) {
        const Eigen::Vector3d n = (cam[t[1]] - cam[t[0]]).cross(cam[t[2]] - cam[t[0]]);
        for (int v : t) {
            normals[v] += n;
        }
    }
    for (auto& n : normals) {
        if (n.norm() > 0.0) {
            n.normalize();
        }
    }

    const Layout layout = make_layout(material);
    out.image = render::RasterImage(camera.width, camera.height, 3);
    out.mask.assign(static_cast<std::size_t>(camera.width) * camera.height, 0);
    for (int y = 0; y < camera.height; ++y) {
        for (int x = 0; x < camera.width; ++x) {
            const std::size_t i = frags.index(x, y);
            Eigen::Vector3d colour = camera.background;
            if (frags.covered(i)) {
                const auto& tri = mesh.triangles[frags.triangle[i]];
                const Eigen::Vector3d& w = frags.weights[i];
                Eigen::Vector3d m = Eigen::Vector3d::Zero();
                Eigen::Vector3d n = Eigen::Vector3d::Zero();
                Eigen::Vector3d p = Eigen::Vector3d::Zero();
                for (int k = 0; k < 3; ++k) {
                    m += w[k] * material.vertices[tri[k]];
                    n += w[k] * normals[tri[k]];
                    p += w[k] * cam[tri[k]];
                }
                const double lambert = std::abs(n.normalized().dot(p.normalized()));
                colour = albedo(m.head<2>(), appearance, layout) * (0.8 + 0.2 * lambert);
                out.mask[i] = 1;
            }
            for (int ch = 0; ch < 3; ++ch) {
                out.image.at(x, y, ch) = static_cast<float>(std::clamp(colour[ch], 0.0, 255.0));
            }
        }
    }
    render::quantize(out.image);
    out.landmarks = render::project_landmarks(mesh, out.pose, out.intrinsics);
    return out;
}

void perturb_landmarks(geometry::LandmarkSet2D& landmarks, double sigma, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, sigma);
    for (auto& p : landmarks.points) {
        p.x() += n(rng);
        p.y() += n(rng);
    }
}

} // namespace facesynth::synth
