#pragma once

#include "facesynth/features/embedding.hpp"

#include <Eigen/Core>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace facesynth::matching {

/**
 * Pearson correlation of two equal-length vectors. When either vector has no
 * variance the score is 0 and `degenerate` (if given) is set. Throws
 * dimension_mismatch.
 */
double ncc(std::span<const double> x, std::span<const double> y, bool* degenerate = nullptr);

/// sum s exp(beta s) / sum exp(beta s), evaluated relative to the maximum.
/// Throws empty_input for no scores and invalid_input for non-finite ones.
double softmax_pool(std::span<const double> scores, double beta);

inline constexpr int default_beta_min = 0;
inline constexpr int default_beta_max = 20;

/// Mean of softmax_pool over the integer betas beta_min..beta_max.
double fuse_scores(std::span<const double> scores, int beta_min = default_beta_min, int beta_max = default_beta_max);

enum class Strategy { min, max, mean, softmax };

const char* to_string(Strategy s) noexcept;
/// Throws invalid_input for unknown names.
Strategy parse_strategy(std::string_view name);

/// min, max or mean of the scores; softmax is not a baseline (invalid_input).
double baseline_pool(std::span<const double> scores, Strategy strategy);

struct FusionConfig
{
    Strategy strategy = Strategy::softmax;
    int beta_min = default_beta_min;
    int beta_max = default_beta_max;

    void validate() const;
};

/// Pools with the configured strategy (softmax means fuse_scores).
double pool(std::span<const double> scores, const FusionConfig& config);

inline constexpr double near_frontal_yaw = 30.0;
inline constexpr double near_profile_yaw = 60.0;

/// Rendering yaw magnitude shared by two faces: 0, 40 or 75 degrees.
int select_mutual_view(double yaw_p, double yaw_q, double near_frontal = near_frontal_yaw,
                       double near_profile = near_profile_yaw);

/// Signed view key for a pair: the magnitude with the sign of yaw_p + yaw_q
/// (a zero sum counts as positive); 0 stays 0.
int mutual_view_key(double yaw_p, double yaw_q, double near_frontal = near_frontal_yaw,
                    double near_profile = near_profile_yaw);

/// Features of one template item (an image, or a pooled video).
struct ItemFeatures
{
    std::string item_id;
    double yaw = 0.0;
    std::optional<features::FeatureVector> in_plane;
    /// Rendered-view features keyed by signed view yaw (0, +-40, +-75).
    std::map<int, features::FeatureVector> rendered;
};

struct TemplateFeatures
{
    std::string template_id;
    std::string subject;
    std::vector<ItemFeatures> items;

    bool has_in_plane() const noexcept;
    bool has_rendered() const noexcept;
};

struct TemplateMatchConfig
{
    FusionConfig fusion;
    bool use_in_plane = true;
    bool use_rendered = true;
    double near_frontal = near_frontal_yaw;
    double near_profile = near_profile_yaw;
};

struct SimilarityResult
{
    double score = 0.0;
    std::optional<double> in_plane;
    std::optional<double> rendered;
    /// Only one of the two fused values was available.
    bool single_variant = false;
    /// Some pair involved a zero-variance feature.
    bool degenerate = false;
};

/// Pairwise NCC over in-plane features (rows of P, columns of Q).
Eigen::MatrixXd in_plane_scores(const TemplateFeatures& p, const TemplateFeatures& q, bool* degenerate = nullptr);

/// NCC of every item pair that has features at its mutual view.
std::vector<double> rendered_scores(const TemplateFeatures& p, const TemplateFeatures& q,
                                    const TemplateMatchConfig& config, bool* degenerate = nullptr);

/**
 * Fuses the in-plane score matrix and the mutual-view scores separately and
 * averages the two. When one kind has no scores the other is returned alone
 * (single_variant). Throws empty_input when neither kind yields a score.
 */
SimilarityResult template_similarity(const TemplateFeatures& p, const TemplateFeatures& q,
                                     const TemplateMatchConfig& config = {});

/// Score matrix as CSV: header row of column ids, then one row per row id.
std::string score_matrix_csv(const Eigen::MatrixXd& scores, std::span<const std::string> row_ids,
                             std::span<const std::string> column_ids);

} // namespace facesynth::matching
