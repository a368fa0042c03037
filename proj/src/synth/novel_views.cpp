#include "facesynth/synth/novel_views.hpp"

#include "facesynth/error.hpp"
#include "facesynth/geometry/rotation.hpp"
#include "facesynth/util/hash.hpp"

#include <cmath>

namespace facesynth::synth {

namespace {

Eigen::Vector3d mean_of(const geometry::Mesh& mesh, std::span<const int> slots)
{
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (int s : slots) {
        sum += mesh.landmark(s);
    }
    return sum / static_cast<double>(slots.size());
}

} // namespace

CanvasView canvas_view(const geometry::Mesh& mesh, double yaw, double pitch, double roll, const CanvasSpec& canvas)
{
    const Eigen::Vector3d left_eye = mean_of(mesh, geometry::ibug68::left_eye);
    const Eigen::Vector3d right_eye = mean_of(mesh, geometry::ibug68::right_eye);
    Eigen::Vector3d centre = Eigen::Vector3d::Zero();
    for (int s = 0; s < static_cast<int>(mesh.landmark_map.size()); ++s) {
        centre += mesh.landmark(s);
    }
    centre /= static_cast<double>(mesh.landmark_map.size());
    centre.z() = 0.0;

    const double eye_distance = (right_eye - left_eye).head<2>().norm();
    const double distance = 8.0 * eye_distance;
    const double eye_depth = distance + 0.5 * (left_eye.z() + right_eye.z()) - centre.z();

    CanvasView view;
    view.intrinsics = geometry::Intrinsics::centered(canvas.eye_fraction * canvas.size * eye_depth / eye_distance,
                                                     {canvas.size, canvas.size});
    view.pose.rotation = geometry::compose_rotation(yaw, pitch, roll);
    view.pose.translation = Eigen::Vector3d(0.0, 0.0, distance) - view.pose.rotation * centre;
    return view;
}

std::vector<double> signed_yaws(std::span<const double> yaws, double source_yaw)
{
    const double sign = source_yaw < 0.0 ? -1.0 : 1.0;
    std::vector<double> out;
    out.reserve(yaws.size());
    for (double y : yaws) {
        out.push_back(sign * std::abs(y));
    }
    return out;
}

NovelViews render_novel_views(const render::RasterImage& image, const geometry::LandmarkSet2D& landmarks,
                              const geometry::Mesh& shape, std::span<const double> yaws,
                              const NovelViewOptions& options)
{
    NovelViews out;
    out.source = geometry::estimate_pose(landmarks, shape, {image.width(), image.height()});
    out.source_angles = geometry::decompose_rotation(out.source.pose.rotation);
    const auto tex = render::texture_from_image(shape, image, out.source.pose, out.source.intrinsics);
    out.yaws = options.match_source_sign ? signed_yaws(yaws, out.source_angles.yaw)
                                         : std::vector<double>(yaws.begin(), yaws.end());
    for (double yaw : out.yaws) {
        const auto view = canvas_view(shape, yaw, out.source_angles.pitch, out.source_angles.roll, options.canvas);
        out.views.push_back(render::rasterize(shape, tex, image, view.pose, view.intrinsics));
    }
    return out;
}

int pick_shape(std::uint64_t seed, std::string_view source_image_id, int shape_count)
{
    if (shape_count <= 0) {
        throw Error(ErrorCode::invalid_input, "shape count must be positive");
    }
    const std::uint64_t h = util::mix64(seed ^ util::fnv1a64(source_image_id));
    return static_cast<int>(((h >> 32) * static_cast<std::uint64_t>(shape_count)) >> 32);
}

} // namespace facesynth::synth
