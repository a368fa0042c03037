#pragma once

#include "facesynth/features/embedding.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace facesynth::features {

enum class MediaType { image, video };

const char* to_string(MediaType t) noexcept;

struct TaggedFeature
{
    FeatureVector feature;
    std::string media_id;
    MediaType type = MediaType::image;
};

/**
 * One output per video (element-wise mean of its frames, placed at the video's
 * first frame) and every still image unchanged, in input order. Frames with an
 * empty vector are dropped and reported in `warnings`. Throws
 * dimension_mismatch when frames of one video differ in length.
 */
std::vector<TaggedFeature> video_pool(std::span<const TaggedFeature> items, std::vector<std::string>* warnings = nullptr);

struct PCAModel
{
    Eigen::VectorXd mean;
    /// Columns are the principal directions, by descending variance.
    Eigen::MatrixXd components;
    /// Variance along each component.
    Eigen::VectorXd variances;

    int dimension() const noexcept { return static_cast<int>(mean.size()); }
};

/**
 * Full-rank PCA: every component is kept, directions without variance are
 * completed orthonormally. Each component's sign makes its largest-magnitude
 * entry positive. Throws empty_input with fewer than two samples,
 * dimension_mismatch for ragged input and zero_variance when all samples are
 * identical.
 */
PCAModel pca_fit(std::span<const FeatureVector> samples);

/// componentsᵀ (x - mean). Throws dimension_mismatch.
FeatureVector pca_apply(const PCAModel& model, const FeatureVector& x);

inline constexpr double default_root_exponent = 0.65;

/// sign(x_i) |x_i|^c. Throws invalid_input unless 0 < c <= 1.
FeatureVector root_normalize(const FeatureVector& x, double c = default_root_exponent);

/// root_normalize(pca_apply(model, x), c).
FeatureVector condition(const PCAModel& model, const FeatureVector& x, double c = default_root_exponent);

/**
 * PCA1 layout, little endian: "PCA1", u32 D, D float64 mean, D float64
 * variances, then the D x D component matrix as float64 in row-major order.
 */
PCAModel read_pca(const std::string& path);
/// FNV-1a over the PCA1 serialisation of the model.
std::uint64_t pca_hash(const PCAModel& model);
void write_pca(const std::string& path, const PCAModel& model);

} // namespace facesynth::features
