#pragma once

#include "facesynth/eval/metrics.hpp"
#include "facesynth/eval/protocol.hpp"
#include "facesynth/features/conditioning.hpp"
#include "facesynth/features/embedding.hpp"
#include "facesynth/matching/fusion.hpp"

#include <Eigen/Core>

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace facesynth::eval {

/// Signed yaws of the rendered views an item may carry.
inline constexpr std::array<int, 5> rendered_views{-75, -40, 0, 40, 75};

/// Embedding id of a rendered view: "<item>@<view>", e.g. "a/b@-40".
std::string rendered_id(const std::string& item_id, int view);

struct BenchmarkConfig
{
    matching::TemplateMatchConfig matcher;
    bool use_pca = true;
    double root_exponent = features::default_root_exponent;
    bool video_pooling = true;
    /// 0 selects the number of available cores.
    unsigned workers = 0;
    std::vector<double> fars{0.01, 0.001};
};

struct MetricsReport
{
    std::map<double, double> tar_at_far;
    std::map<int, double> cmc;
    std::optional<double> accuracy;
    std::optional<double> eer_complement;
    int pairs = 0;
    int genuine = 0;
    int impostor = 0;
    int probes = 0;
    int gallery = 0;
    int degenerate_comparisons = 0;
    int single_variant_comparisons = 0;
    std::optional<std::string> pca_hash;
    std::string strategy;

    /// Per-pair scores in protocol order.
    std::vector<double> pair_scores;
    /// Probes x gallery template similarities.
    Eigen::MatrixXd identification_scores;
};

/// Fits the conditioning PCA on every available embedding (in-plane and
/// rendered) of the protocol's training items. Throws protocol_error when
/// there is none.
features::PCAModel fit_conditioning(const Protocol& protocol, const features::EmbeddingTable& table);

/// Throws leakage when a training item appears in a template used by the
/// pairs, gallery or probes.
void check_leakage(const Protocol& protocol);

/**
 * Features of one template: each item's in-plane embedding (id = item id) and
 * rendered views, conditioned with `pca` when given; then, with video pooling,
 * frames of one video are averaged per variant and view. Throws
 * embedding_not_found for an item with no embedding at all.
 */
matching::TemplateFeatures build_template_features(const ProtocolTemplate& tpl, const Protocol& protocol,
                                                   const features::EmbeddingTable& table,
                                                   const features::PCAModel* pca, const BenchmarkConfig& config);

/// Verification and identification metrics over the protocol.
MetricsReport run_benchmark(const Protocol& protocol, const features::EmbeddingTable& table,
                            const BenchmarkConfig& config = {});

std::string report_json(const MetricsReport& report);
std::string report_table(const MetricsReport& report);

} // namespace facesynth::eval
