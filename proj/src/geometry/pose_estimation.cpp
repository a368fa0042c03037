#include "facesynth/geometry/pose_estimation.hpp"

#include "facesynth/error.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <cmath>
#include <limits>

namespace facesynth::geometry {

namespace {

struct Candidate
{
    Eigen::Matrix3d rotation;
    Eigen::Vector3d translation;
    double focal;
};

/// Sum of squared reprojection errors; infinity when a point falls behind the camera.
double cost_of(const Candidate& c, std::span<const Eigen::Vector2d> image_points,
               std::span<const Eigen::Vector3d> model_points, const Eigen::Vector2d& pp)
{
    double cost = 0.0;
    for (std::size_t i = 0; i < model_points.size(); ++i) {
        const Eigen::Vector3d x = c.rotation * model_points[i] + c.translation;
        if (!(x.z() > 0.0)) {
            return std::numeric_limits<double>::infinity();
        }
        const Eigen::Vector2d proj = pp + c.focal * x.head<2>() / x.z();
        cost += (proj - image_points[i]).squaredNorm();
    }
    return cost;
}

std::optional<Candidate> dlt_initialisation(std::span<const Eigen::Vector2d> image_points,
                                            std::span<const Eigen::Vector3d> model_points, const Eigen::Vector2d& pp,
                                            double focal)
{
    const auto n = static_cast<Eigen::Index>(model_points.size());

    // Normalised camera coordinates, then Hartley conditioning on both sides.
    std::vector<Eigen::Vector2d> rays(n);
    Eigen::Vector2d mean2 = Eigen::Vector2d::Zero();
    Eigen::Vector3d mean3 = Eigen::Vector3d::Zero();
    for (Eigen::Index i = 0; i < n; ++i) {
        rays[i] = (image_points[i] - pp) / focal;
        mean2 += rays[i];
        mean3 += model_points[i];
    }
    mean2 /= static_cast<double>(n);
    mean3 /= static_cast<double>(n);
    double spread2 = 0.0;
    double spread3 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        spread2 += (rays[i] - mean2).norm();
        spread3 += (model_points[i] - mean3).norm();
    }
    spread2 /= static_cast<double>(n);
    spread3 /= static_cast<double>(n);
    if (!(spread2 > 0.0) || !(spread3 > 0.0)) {
        return std::nullopt;
    }
    const double s2 = std::sqrt(2.0) / spread2;
    const double s3 = std::sqrt(3.0) / spread3;

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 12);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Vector2d r = s2 * (rays[i] - mean2);
        Eigen::Vector4d x;
        x << s3 * (model_points[i] - mean3), 1.0;
        a.block<1, 4>(2 * i, 0) = x.transpose();
        a.block<1, 4>(2 * i, 8) = -r.x() * x.transpose();
        a.block<1, 4>(2 * i + 1, 4) = x.transpose();
        a.block<1, 4>(2 * i + 1, 8) = -r.y() * x.transpose();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const Eigen::VectorXd p = svd.matrixV().col(11);
    Eigen::Matrix<double, 3, 4> pn;
    pn << p.segment<4>(0).transpose(), p.segment<4>(4).transpose(), p.segment<4>(8).transpose();

    Eigen::Matrix3d t2 = Eigen::Matrix3d::Identity();
    t2(0, 0) = s2;
    t2(1, 1) = s2;
    t2.block<2, 1>(0, 2) = -s2 * mean2;
    Eigen::Matrix4d t3 = Eigen::Matrix4d::Identity();
    t3.block<3, 3>(0, 0) *= s3;
    t3.block<3, 1>(0, 3) = -s3 * mean3;
    Eigen::Matrix<double, 3, 4> proj = t2.inverse() * pn * t3;

    Eigen::Vector4d centroid;
    centroid << mean3, 1.0;
    if ((proj * centroid).z() < 0.0) {
        proj = -proj;
    }
    const Eigen::Matrix3d m = proj.leftCols<3>();
    Eigen::JacobiSVD<Eigen::Matrix3d> msvd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d fix = Eigen::Matrix3d::Identity();
    fix(2, 2) = (msvd.matrixU() * msvd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
    const double scale = msvd.singularValues().mean();
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        return std::nullopt;
    }
    Candidate c{msvd.matrixU() * fix * msvd.matrixV().transpose(), proj.col(3) / scale, focal};
    if (!c.rotation.allFinite() || !c.translation.allFinite()) {
        return std::nullopt;
    }
    return c;
}

/// Frontal fallback seed: identity rotation, depth from the projected size.
Candidate frontal_initialisation(std::span<const Eigen::Vector2d> image_points,
                                 std::span<const Eigen::Vector3d> model_points, const Eigen::Vector2d& pp, double focal)
{
    Eigen::Vector2d mean2 = Eigen::Vector2d::Zero();
    Eigen::Vector3d mean3 = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < model_points.size(); ++i) {
        mean2 += image_points[i];
        mean3 += model_points[i];
    }
    mean2 /= static_cast<double>(model_points.size());
    mean3 /= static_cast<double>(model_points.size());
    double spread2 = 0.0;
    double spread3 = 0.0;
    for (std::size_t i = 0; i < model_points.size(); ++i) {
        spread2 += (image_points[i] - mean2).norm();
        spread3 += (model_points[i] - mean3).head<2>().norm();
    }
    const double depth = focal * spread3 / std::max(spread2, 1e-9);
    Candidate c{Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero(), focal};
    const Eigen::Vector2d offset = (mean2 - pp) * depth / focal;
    c.translation = Eigen::Vector3d(offset.x(), offset.y(), depth) - mean3;
    return c;
}

Candidate refine(Candidate c, std::span<const Eigen::Vector2d> image_points,
                 std::span<const Eigen::Vector3d> model_points, const Eigen::Vector2d& pp, int max_iterations,
                 int& iterations)
{
    const auto n = static_cast<Eigen::Index>(model_points.size());
    double cost = cost_of(c, image_points, model_points, pp);
    double lambda = 1e-3;
    Eigen::MatrixXd jac(2 * n, 7);
    Eigen::VectorXd res(2 * n);
    bool converged = false;
    for (iterations = 0; !converged && iterations < max_iterations; ++iterations) {
        if (!std::isfinite(cost)) {
            break;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Vector3d rp = c.rotation * model_points[i];
            const Eigen::Vector3d x = rp + c.translation;
            const double iz = 1.0 / x.z();
            const Eigen::Vector2d proj = pp + c.focal * x.head<2>() * iz;
            res.segment<2>(2 * i) = proj - image_points[i];

            Eigen::Matrix<double, 2, 3> dproj;
            dproj << c.focal * iz, 0.0, -c.focal * x.x() * iz * iz,
                     0.0, c.focal * iz, -c.focal * x.y() * iz * iz;
            Eigen::Matrix3d skew;
            skew << 0.0, -rp.z(), rp.y(),
                    rp.z(), 0.0, -rp.x(),
                    -rp.y(), rp.x(), 0.0;
            // Left perturbation R <- exp([w]) R gives dX/dw = -[R P]x.
            jac.block<2, 3>(2 * i, 0) = -dproj * skew;
            jac.block<2, 3>(2 * i, 3) = dproj;
            jac.block<2, 1>(2 * i, 6) = x.head<2>() * iz;
        }
        const Eigen::Matrix<double, 7, 7> jtj = jac.transpose() * jac;
        const Eigen::Matrix<double, 7, 1> grad = jac.transpose() * res;
        if (grad.cwiseAbs().maxCoeff() < 1e-14 * (1.0 + cost)) {
            break;
        }

        bool improved = false;
        while (lambda < 1e16) {
            Eigen::Matrix<double, 7, 7> damped = jtj;
            for (int k = 0; k < 7; ++k) {
                damped(k, k) += lambda * std::max(jtj(k, k), 1e-12);
            }
            const Eigen::Matrix<double, 7, 1> step = damped.ldlt().solve(-grad);
            if (!step.allFinite()) {
                lambda *= 10.0;
                continue;
            }
            Candidate next = c;
            const Eigen::Vector3d w = step.head<3>();
            const double angle = w.norm();
            if (angle > 0.0) {
                next.rotation = Eigen::AngleAxisd(angle, w / angle).toRotationMatrix() * c.rotation;
            }
            next.translation += step.segment<3>(3);
            next.focal += step(6);
            const double next_cost =
                next.focal > 0.0 ? cost_of(next, image_points, model_points, pp) : std::numeric_limits<double>::infinity();
            if (next_cost < cost) {
                const double decrease = cost - next_cost;
                c = next;
                cost = next_cost;
                lambda = std::max(lambda * 0.1, 1e-12);
                improved = true;
                converged = decrease <= 1e-15 * (1.0 + cost) || step.norm() < 1e-14;
                break;
            }
            lambda *= 10.0;
        }
        if (!improved) {
            break;
        }
    }
    // Re-orthonormalise accumulated rotation updates.
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(c.rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
    c.rotation = svd.matrixU() * svd.matrixV().transpose();
    return c;
}

bool collinear(std::span<const Eigen::Vector2d> points)
{
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (const auto& p : points) {
        mean += p;
    }
    mean /= static_cast<double>(points.size());
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (const auto& p : points) {
        cov += (p - mean) * (p - mean).transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
    const double largest = eig.eigenvalues()(1);
    return !(largest > 0.0) || eig.eigenvalues()(0) <= 1e-8 * largest;
}

} // namespace

double reprojection_rms(std::span<const Eigen::Vector2d> image_points, std::span<const Eigen::Vector3d> model_points,
                        const Intrinsics& intrinsics, const Pose& pose)
{
    const Candidate c{pose.rotation, pose.translation, intrinsics.focal};
    const double cost = cost_of(c, image_points, model_points, intrinsics.principal_point);
    return std::sqrt(cost / static_cast<double>(model_points.size()));
}

PoseEstimate estimate_pose(std::span<const Eigen::Vector2d> image_points, std::span<const Eigen::Vector3d> model_points,
                           ImageSize image_size, const PoseOptions& options)
{
    if (image_points.size() != model_points.size()) {
        throw Error(ErrorCode::invalid_input, "correspondence lists differ in length");
    }
    if (image_points.size() < static_cast<std::size_t>(min_pose_correspondences)) {
        throw Error(ErrorCode::insufficient_landmarks,
                    std::to_string(image_points.size()) + " correspondences, need at least " +
                        std::to_string(min_pose_correspondences));
    }
    if (image_size.width <= 0 || image_size.height <= 0) {
        throw Error(ErrorCode::invalid_input, "image size must be positive");
    }
    if (collinear(image_points)) {
        throw Error(ErrorCode::pose_failure, "landmarks are collinear");
    }

    const Eigen::Vector2d pp =
        options.principal_point.value_or(Eigen::Vector2d((image_size.width - 1) / 2.0, (image_size.height - 1) / 2.0));
    const double width_focal = options.initial_focal.value_or(static_cast<double>(image_size.width));

    // Primary seed at the image width; further focal seeds only when it stalls.
    const double restart_threshold = 2.0;
    std::optional<Candidate> best;
    double best_cost = std::numeric_limits<double>::infinity();
    int best_iterations = 0;
    for (double focal_scale : {1.0, 0.5, 2.0, 4.0}) {
        const double focal = width_focal * focal_scale;
        std::vector<Candidate> seeds;
        if (auto dlt = dlt_initialisation(image_points, model_points, pp, focal)) {
            seeds.push_back(*dlt);
        }
        seeds.push_back(frontal_initialisation(image_points, model_points, pp, focal));
        for (const auto& seed : seeds) {
            int iterations = 0;
            Candidate refined = refine(seed, image_points, model_points, pp, options.max_iterations, iterations);
            const double cost = cost_of(refined, image_points, model_points, pp);
            if (cost < best_cost) {
                best_cost = cost;
                best = refined;
                best_iterations = iterations;
            }
        }
        if (best && std::sqrt(best_cost / static_cast<double>(model_points.size())) <= restart_threshold) {
            break;
        }
    }

    const double residual = std::sqrt(best_cost / static_cast<double>(model_points.size()));
    if (!best || !std::isfinite(residual) || residual > image_size.diagonal() || !(best->focal > 0.0)) {
        throw Error(ErrorCode::pose_failure, "pose optimisation diverged");
    }

    PoseEstimate estimate;
    estimate.intrinsics.focal = best->focal;
    estimate.intrinsics.principal_point = pp;
    estimate.intrinsics.image_size = image_size;
    estimate.pose.rotation = best->rotation;
    estimate.pose.translation = best->translation;
    estimate.residual = residual;
    estimate.iterations = best_iterations;
    return estimate;
}

PoseEstimate estimate_pose(const LandmarkSet2D& landmarks, const Mesh& mesh, ImageSize image_size,
                           const PoseOptions& options)
{
    landmarks.validate();
    if (mesh.landmark_map.size() != landmarks.size()) {
        throw Error(ErrorCode::invalid_input, "mesh landmark map does not match the landmark schema");
    }
    std::vector<int> slots = options.slots;
    if (slots.empty()) {
        for (int i = 0; i < static_cast<int>(landmarks.size()); ++i) {
            slots.push_back(i);
        }
    }
    std::vector<Eigen::Vector2d> image_points;
    std::vector<Eigen::Vector3d> model_points;
    for (int slot : slots) {
        if (slot >= 0 && slot < static_cast<int>(landmarks.size()) && landmarks.visible[slot]) {
            image_points.push_back(landmarks.points[slot]);
            model_points.push_back(mesh.landmark(slot));
        }
    }
    return estimate_pose(image_points, model_points, image_size, options);
}

} // namespace facesynth::geometry
