#pragma once

#include "facesynth/features/embedding.hpp"
#include "facesynth/geometry/mesh.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace facesynth::pipeline {

struct ExtractConfig
{
    /// Also embed renders at every view of eval::rendered_views ("<id>@<view>").
    bool render_views = true;
    int canvas_size = 256;
    double frontal_threshold = 30.0;
    /// 0 selects the number of available cores.
    unsigned workers = 0;
};

struct ExtractResult
{
    features::EmbeddingTable table;
    /// Estimated yaw of each item whose pose could be recovered.
    std::map<std::string, double> yaws;
    /// One line per image that needed a fallback, sorted by id.
    std::vector<std::string> log;
};

/**
 * Embeds every PNG below `input_root` (recursively, sorted); the item id is the
 * relative path without extension, '/' separated. Images with a .pts landmark
 * file are aligned in-plane by yaw class and, when configured, rendered at the
 * fixed views on `generic`. Images without landmarks are embedded as they are;
 * pose or alignment failures fall back to a centre or .bbox crop.
 */
ExtractResult extract_embeddings(const std::filesystem::path& input_root, const geometry::Mesh& generic,
                                 const features::EmbeddingBackend& backend, const ExtractConfig& config = {});

} // namespace facesynth::pipeline
