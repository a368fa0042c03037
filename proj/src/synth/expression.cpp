#include "facesynth/synth/expression.hpp"

#include "facesynth/error.hpp"
#include "facesynth/render/rasterizer.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace facesynth::synth {

namespace {

struct MouthProblem
{
    std::vector<Eigen::Vector2d> observed;
    std::vector<Eigen::Vector3d> base;                                 // camera-frame rotated neutral + t
    std::vector<std::array<Eigen::Vector3d, expression_count>> delta; // camera-frame rotated deltas
    double focal = 0.0;
    Eigen::Vector2d principal = Eigen::Vector2d::Zero();

    Eigen::Vector3d camera_point(std::size_t i, const ExpressionCoefficients& c) const
    {
        Eigen::Vector3d x = base[i];
        for (int k = 0; k < expression_count; ++k) {
            x += c[k] * delta[i][k];
        }
        return x;
    }

    double cost(const ExpressionCoefficients& c) const
    {
        double sum = 0.0;
        for (std::size_t i = 0; i < observed.size(); ++i) {
            const Eigen::Vector3d x = camera_point(i, c);
            if (x.z() <= 0.0) {
                return std::numeric_limits<double>::infinity();
            }
            const Eigen::Vector2d p = focal * x.head<2>() / x.z() + principal;
            sum += (p - observed[i]).squaredNorm();
        }
        return sum;
    }
};

ExpressionCoefficients clamp_box(ExpressionCoefficients c)
{
    for (double& v : c) {
        v = std::clamp(v, 0.0, 1.0);
    }
    return c;
}

// Chessboard distance from each mask pixel to the nearest pixel outside the
// mask (the image border counts as outside), capped at `cap`.
std::vector<int> inside_distance(const std::vector<std::uint8_t>& mask, int width, int height, int cap)
{
    std::vector<int> d(mask.size(), 0);
    auto at = [&](int x, int y) { return (x < 0 || y < 0 || x >= width || y >= height) ? 0 : d[y * width + x]; };
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (!mask[y * width + x]) {
                continue;
            }
            const int m = std::min({at(x - 1, y), at(x - 1, y - 1), at(x, y - 1), at(x + 1, y - 1)});
            d[y * width + x] = std::min(cap, m + 1);
        }
    }
    for (int y = height - 1; y >= 0; --y) {
        for (int x = width - 1; x >= 0; --x) {
            if (!mask[y * width + x]) {
                continue;
            }
            const int m = std::min({at(x + 1, y), at(x + 1, y + 1), at(x, y + 1), at(x - 1, y + 1)});
            d[y * width + x] = std::min(d[y * width + x], m + 1);
        }
    }
    return d;
}

} // namespace

ExpressionFit fit_expression(const geometry::LandmarkSet2D& landmarks, const geometry::Mesh& neutral,
                             const BlendshapeBasis& basis, const geometry::Pose& pose,
                             const geometry::Intrinsics& intrinsics)
{
    landmarks.validate();
    for (const auto& d : basis.deltas) {
        if (d.size() != neutral.vertices.size()) {
            throw Error(ErrorCode::invalid_input, "blendshape basis does not match the neutral mesh");
        }
    }
    MouthProblem problem;
    problem.focal = intrinsics.focal;
    problem.principal = intrinsics.principal_point;
    for (int slot : geometry::ibug68::mouth_slots()) {
        if (slot >= static_cast<int>(landmarks.size()) || !landmarks.visible[slot]) {
            continue;
        }
        const int v = neutral.landmark_map.at(slot);
        problem.observed.push_back(landmarks.points[slot]);
        problem.base.push_back(pose.to_camera(neutral.vertices[v]));
        std::array<Eigen::Vector3d, expression_count> d;
        for (int k = 0; k < expression_count; ++k) {
            d[k] = pose.rotation * basis.deltas[k][v];
        }
        problem.delta.push_back(d);
    }
    const int m = static_cast<int>(problem.observed.size());
    if (m < min_mouth_landmarks) {
        throw Error(ErrorCode::expression_unfittable,
                    "only " + std::to_string(m) + " visible mouth landmarks, need " +
                        std::to_string(min_mouth_landmarks));
    }

    ExpressionFit fit;
    fit.landmarks_used = m;
    ExpressionCoefficients c{};
    double cost = problem.cost(c);
    if (!std::isfinite(cost)) {
        throw Error(ErrorCode::expression_unfittable, "mouth landmarks project behind the camera");
    }
    const int max_iterations = 50;
    for (int it = 0; it < max_iterations; ++it) {
        fit.iterations = it + 1;
        Eigen::MatrixXd jac(2 * m, expression_count);
        Eigen::VectorXd res(2 * m);
        for (int i = 0; i < m; ++i) {
            const Eigen::Vector3d x = problem.camera_point(i, c);
            const double iz = 1.0 / x.z();
            const Eigen::Vector2d p = problem.focal * x.head<2>() * iz + problem.principal;
            res.segment<2>(2 * i) = p - problem.observed[i];
            Eigen::Matrix<double, 2, 3> dp;
            dp << problem.focal * iz, 0.0, -problem.focal * x.x() * iz * iz, 0.0, problem.focal * iz,
                -problem.focal * x.y() * iz * iz;
            for (int k = 0; k < expression_count; ++k) {
                jac.block<2, 1>(2 * i, k) = dp * problem.delta[i][k];
            }
        }
        const Eigen::VectorXd grad = jac.transpose() * res;
        const Eigen::MatrixXd hess = jac.transpose() * jac;

        // Active set: coefficients on a bound whose gradient pushes outward stay fixed.
        std::vector<int> free;
        for (int k = 0; k < expression_count; ++k) {
            const bool at_low = c[k] <= 0.0 && grad[k] > 0.0;
            const bool at_high = c[k] >= 1.0 && grad[k] < 0.0;
            if (!at_low && !at_high) {
                free.push_back(k);
            }
        }
        if (free.empty()) {
            break;
        }
        const int nf = static_cast<int>(free.size());
        Eigen::MatrixXd hf(nf, nf);
        Eigen::VectorXd gf(nf);
        for (int a = 0; a < nf; ++a) {
            gf[a] = grad[free[a]];
            for (int b = 0; b < nf; ++b) {
                hf(a, b) = hess(free[a], free[b]);
            }
        }
        hf.diagonal().array() += 1e-9 * std::max(1.0, hf.trace());
        const Eigen::VectorXd step = hf.ldlt().solve(-gf);

        bool improved = false;
        double scale = 1.0;
        ExpressionCoefficients next = c;
        for (int attempt = 0; attempt < 30; ++attempt, scale *= 0.5) {
            next = c;
            for (int a = 0; a < nf; ++a) {
                next[free[a]] += scale * step[a];
            }
            next = clamp_box(next);
            const double next_cost = problem.cost(next);
            if (next_cost < cost) {
                improved = true;
                cost = next_cost;
                break;
            }
        }
        if (!improved) {
            break;
        }
        double change = 0.0;
        for (int k = 0; k < expression_count; ++k) {
            change = std::max(change, std::abs(next[k] - c[k]));
        }
        c = next;
        if (change < 1e-10) {
            break;
        }
    }
    fit.coefficients = c;
    fit.residual = std::sqrt(cost / m);
    return fit;
}

NeutralizeResult neutralize_expression(const render::RasterImage& image, const geometry::LandmarkSet2D& landmarks,
                                       const geometry::Mesh& neutral, const BlendshapeBasis& basis,
                                       const NeutralizeOptions& options)
{
    NeutralizeResult out;
    out.image = image;
    try {
        geometry::PoseOptions pose_options;
        pose_options.slots = geometry::ibug68::rigid_slots();
        out.pose = geometry::estimate_pose(landmarks, neutral, {image.width(), image.height()}, pose_options);
        out.fit = fit_expression(landmarks, neutral, basis, out.pose.pose, out.pose.intrinsics);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::invalid_input || e.code() == ErrorCode::io_error) {
            throw;
        }
        out.skipped = true;
        out.skip_reason = e.what();
        out.alpha.assign(static_cast<std::size_t>(image.width()) * image.height(), 0.0F);
        return out;
    }

    auto instance = [&](const ExpressionCoefficients& c) {
        geometry::Mesh mesh = neutral;
        for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
            for (int k = 0; k < expression_count; ++k) {
                mesh.vertices[v] += c[k] * basis.deltas[k][v];
            }
        }
        return mesh;
    };
    const geometry::Mesh fitted = instance(out.fit.coefficients);
    const auto tex = render::texture_from_image(fitted, image, out.pose.pose, out.pose.intrinsics);
    out.neutral_coefficients = out.fit.coefficients;
    out.neutral_coefficients[static_cast<int>(Expression::mouth_open)] = 0.0;
    const geometry::Mesh target = instance(out.neutral_coefficients);
    const auto rendered = render::rasterize(target, tex, image, out.pose.pose, out.pose.intrinsics);

    const int w = image.width();
    const int h = image.height();
    const int band = std::max(0, options.feather_band);
    const auto dist = inside_distance(rendered.mask, w, h, band + 1);
    out.alpha.assign(static_cast<std::size_t>(w) * h, 0.0F);
    const int channels = image.channels();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (!rendered.mask[i]) {
                continue;
            }
            const float a = std::min(1.0F, static_cast<float>(dist[i]) / static_cast<float>(band + 1));
            out.alpha[i] = a;
            for (int ch = 0; ch < channels; ++ch) {
                const float src = image.at(x, y, ch);
                out.image.at(x, y, ch) = src + a * (rendered.image.at(x, y, ch) - src);
            }
        }
    }
    return out;
}

} // namespace facesynth::synth
