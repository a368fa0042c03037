#pragma once

#include "facesynth/augment/alignment.hpp"
#include "facesynth/augment/manifest.hpp"
#include "facesynth/render/image.hpp"
#include "facesynth/synth/assets.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace facesynth::augment {

/// One source image of the input dataset.
struct DatasetEntry
{
    std::string subject_label;
    std::filesystem::path image_path;
    /// May not exist; a missing or unreadable file counts as a landmark failure.
    std::filesystem::path landmark_path;
    std::optional<BoundingBox> bbox;
    /// Image path relative to the input root, '/' separated.
    std::string source_path;
    std::string stem;
};

/**
 * Input layout: one directory per subject (the directory name is the label)
 * holding <stem>.png images, <stem>.pts landmark files and optional
 * <stem>.bbox files ("x y width height"). Entries are sorted by subject, then
 * file name. Throws empty_input when no image is found.
 */
std::vector<DatasetEntry> scan_dataset(const std::filesystem::path& input_root);

struct AugmentConfig
{
    std::vector<double> yaws{0.0, 40.0, 75.0};
    int output_size = 256;
    std::uint64_t seed = 0;
    double frontal_threshold = default_frontal_threshold;
    bool expression = true;
    /// Random shape per image; when false every render uses shape 0 and shape_id is null.
    bool shapes = true;
    /// Emit an aligned bbox_fallback image on landmark or pose failure; otherwise skip the entry.
    bool fallback = true;
    /// 0 selects the number of available cores.
    unsigned workers = 0;

    /// Throws invalid_input for thresholds outside (0, 90), an empty yaw set or a tiny canvas.
    void validate() const;
};

struct AugmentedImage
{
    render::RasterImage image;
    ManifestRow row;
};

enum class EntryStatus { processed, fallback, skipped };

struct EntryResult
{
    EntryStatus status = EntryStatus::processed;
    std::vector<AugmentedImage> images;
    /// Deterministic log lines for this entry.
    std::vector<std::string> log;
};

/// Shared read-only inputs of an augmentation run.
struct AugmentAssets
{
    const synth::ShapeSet& shapes;
    const synth::BlendshapeBasis& basis;
    AlignmentTemplates templates;
};

AugmentAssets make_augment_assets(const synth::ShapeSet& shapes, const synth::BlendshapeBasis& basis,
                                  const AugmentConfig& config);

/**
 * All variants of one entry: the in-plane aligned original, one canvas render
 * per configured yaw on the picked shape, and the expression-neutralized image
 * with the original's alignment. On landmark or pose failure only a
 * bbox_fallback crop is produced. Never throws for per-entry data problems.
 */
EntryResult augment_image(const DatasetEntry& entry, const AugmentAssets& assets, const AugmentConfig& config);

struct AugmentSummary
{
    std::vector<ManifestRow> manifest;
    int entries = 0;
    int processed = 0;
    int fallback = 0;
    int skipped = 0;
};

/**
 * Augments every entry under input_root, writing images, OUT/manifest.jsonl
 * and OUT/augment.log. Rows and log lines are sorted before writing, so the
 * bytes do not depend on the worker count.
 */
AugmentSummary augment_dataset(const std::filesystem::path& input_root, const std::filesystem::path& output_root,
                               const synth::ShapeSet& shapes, const synth::BlendshapeBasis& basis,
                               const AugmentConfig& config);

} // namespace facesynth::augment
