#pragma once

#include <Eigen/Core>

#include <span>

namespace facesynth::geometry {

/// p -> scale * rotation * p + translation
struct Similarity2D
{
    double scale = 1.0;
    Eigen::Matrix2d rotation = Eigen::Matrix2d::Identity();
    Eigen::Vector2d translation = Eigen::Vector2d::Zero();

    Eigen::Vector2d apply(const Eigen::Vector2d& p) const { return scale * (rotation * p) + translation; }
    Similarity2D inverse() const;
    /// Rotation angle in degrees.
    double angle() const;
};

struct SimilarityFit
{
    Similarity2D transform;
    /// RMS distance between the mapped source points and the targets.
    double residual = 0.0;
};

/**
 * Closed-form least-squares similarity (Umeyama) mapping src onto dst. Exact
 * for two pairs. Throws invalid_input on size mismatch or fewer than two
 * pairs and degenerate_configuration when all source points coincide.
 */
SimilarityFit estimate_similarity_2d(std::span<const Eigen::Vector2d> src, std::span<const Eigen::Vector2d> dst);

} // namespace facesynth::geometry
