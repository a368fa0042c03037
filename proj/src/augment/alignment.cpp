#include "facesynth/augment/alignment.hpp"

#include "facesynth/error.hpp"
#include "facesynth/geometry/camera.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace facesynth::augment {

namespace {

std::optional<Eigen::Vector2d> eye_centre(const geometry::LandmarkSet2D& lm, std::span<const int> slots)
{
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    int n = 0;
    for (int s : slots) {
        if (s < static_cast<int>(lm.size()) && lm.visible[s]) {
            sum += lm.points[s];
            ++n;
        }
    }
    if (n < min_visible_eye_points) {
        return std::nullopt;
    }
    return sum / n;
}

Eigen::Vector2d project_on_canvas(const synth::CanvasView& view, const Eigen::Vector3d& point)
{
    const auto p = geometry::project_camera_point(view.pose.to_camera(point), view.intrinsics);
    if (!p) {
        throw Error(ErrorCode::invalid_input, "template point behind the canvas camera");
    }
    return *p;
}

} // namespace

const char* to_string(Alignment a) noexcept
{
    switch (a) {
    case Alignment::frontal9:
        return "frontal9";
    case Alignment::profile2:
        return "profile2";
    case Alignment::bbox_fallback:
        return "bbox_fallback";
    }
    return "unknown";
}

AlignmentClass classify_alignment(double yaw_degrees, double threshold)
{
    return std::abs(yaw_degrees) <= threshold ? AlignmentClass::frontal : AlignmentClass::profile;
}

AlignmentTemplates make_alignment_templates(const geometry::Mesh& generic, const synth::CanvasSpec& canvas)
{
    AlignmentTemplates t;
    t.size = canvas.size;
    const auto frontal = synth::canvas_view(generic, 0.0, 0.0, 0.0, canvas);
    for (std::size_t i = 0; i < geometry::ibug68::frontal9.size(); ++i) {
        t.frontal[i] = project_on_canvas(frontal, generic.landmark(geometry::ibug68::frontal9[i]));
    }
    const auto profile = synth::canvas_view(generic, profile_template_yaw, 0.0, 0.0, canvas);
    Eigen::Vector3d eye = Eigen::Vector3d::Zero();
    for (int s : geometry::ibug68::right_eye) {
        eye += generic.landmark(s);
    }
    t.profile_eye = project_on_canvas(profile, eye / 6.0);
    t.profile_nose = project_on_canvas(profile, generic.landmark(geometry::ibug68::nose_tip));
    return t;
}

geometry::Similarity2D alignment_transform(const geometry::LandmarkSet2D& landmarks, AlignmentClass cls,
                                           const AlignmentTemplates& templates)
{
    landmarks.validate();
    auto visible = [&](int s) { return s < static_cast<int>(landmarks.size()) && landmarks.visible[s]; };
    if (cls == AlignmentClass::frontal) {
        std::vector<Eigen::Vector2d> src;
        for (int s : geometry::ibug68::frontal9) {
            if (!visible(s)) {
                throw Error(ErrorCode::alignment_failure, "frontal slot " + std::to_string(s) + " not visible");
            }
            src.push_back(landmarks.points[s]);
        }
        return geometry::estimate_similarity_2d(src, templates.frontal).transform;
    }

    if (!visible(geometry::ibug68::nose_tip)) {
        throw Error(ErrorCode::alignment_failure, "nose tip not visible");
    }
    const Eigen::Vector2d nose = landmarks.points[geometry::ibug68::nose_tip];
    const auto left = eye_centre(landmarks, geometry::ibug68::left_eye);
    const auto right = eye_centre(landmarks, geometry::ibug68::right_eye);
    if (!left && !right) {
        throw Error(ErrorCode::alignment_failure, "no visible eye");
    }
    bool use_right = right.has_value();
    if (left && right) {
        use_right = (*right - nose).norm() >= (*left - nose).norm();
    }
    const double mirror = templates.size - 1.0;
    Eigen::Vector2d eye_target = templates.profile_eye;
    Eigen::Vector2d nose_target = templates.profile_nose;
    if (!use_right) {
        eye_target.x() = mirror - eye_target.x();
        nose_target.x() = mirror - nose_target.x();
    }
    const std::array<Eigen::Vector2d, 2> src{use_right ? *right : *left, nose};
    const std::array<Eigen::Vector2d, 2> dst{eye_target, nose_target};
    try {
        return geometry::estimate_similarity_2d(src, dst).transform;
    } catch (const Error& e) {
        throw Error(ErrorCode::alignment_failure, e.what());
    }
}

AlignedImage align_in_plane(const render::RasterImage& image, const geometry::LandmarkSet2D& landmarks,
                            AlignmentClass cls, const AlignmentTemplates& templates)
{
    AlignedImage out;
    out.transform = alignment_transform(landmarks, cls, templates);
    out.alignment = cls == AlignmentClass::frontal ? Alignment::frontal9 : Alignment::profile2;
    out.image = render::warp_similarity(image, out.transform, templates.size, templates.size);
    return out;
}

BoundingBox read_bounding_box(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::io_error, "cannot open " + path);
    }
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::istringstream ss(line);
        BoundingBox b;
        if (!(ss >> b.x >> b.y >> b.width >> b.height) || b.width <= 0.0 || b.height <= 0.0) {
            throw Error(ErrorCode::invalid_input, "malformed bounding box in " + path);
        }
        return b;
    }
    throw Error(ErrorCode::invalid_input, "empty bounding box file " + path);
}

AlignedImage crop_fallback(const render::RasterImage& image, const std::optional<BoundingBox>& box, int size)
{
    Eigen::Vector2d centre;
    double side = 0.0;
    if (box) {
        centre = Eigen::Vector2d(box->x + 0.5 * box->width, box->y + 0.5 * box->height);
        side = std::max(box->width, box->height);
    } else {
        centre = Eigen::Vector2d(0.5 * image.width(), 0.5 * image.height());
        side = std::min(image.width(), image.height());
    }
    AlignedImage out;
    out.alignment = Alignment::bbox_fallback;
    out.transform.scale = size / side;
    // Pixel centres: the box [c - side/2, c + side/2] maps onto [-0.5, size - 0.5].
    out.transform.translation =
        Eigen::Vector2d::Constant(0.5 * size - 0.5) - out.transform.scale * (centre - Eigen::Vector2d::Constant(0.5));
    out.image = render::warp_similarity(image, out.transform, size, size);
    return out;
}

} // namespace facesynth::augment
