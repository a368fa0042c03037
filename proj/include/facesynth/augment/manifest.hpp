#pragma once

#include "facesynth/augment/alignment.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace facesynth::augment {

enum class Variant { aligned, pose_render, expression };

const char* to_string(Variant v) noexcept;

struct ManifestRow
{
    /// Relative to the output root, '/' separated.
    std::string output_path;
    std::string subject_label;
    /// Relative to the input root, '/' separated.
    std::string source_path;
    Variant variant = Variant::aligned;
    /// Rendered yaw for pose_render rows.
    std::optional<double> yaw;
    std::optional<int> shape_id;
    /// Unset for pose_render rows, which live on the synthesis canvas.
    std::optional<Alignment> alignment;

    bool operator==(const ManifestRow&) const = default;
};

/// Orders by (subject, source, variant, yaw, output path).
bool manifest_less(const ManifestRow& a, const ManifestRow& b);

/// One JSON object per line with the fields in declaration order; absent values are null.
std::string format_manifest_row(const ManifestRow& row);
ManifestRow parse_manifest_row(std::string_view line);

void write_manifest(const std::string& path, const std::vector<ManifestRow>& rows);
std::vector<ManifestRow> read_manifest(const std::string& path);

/// "<stem>_<variant>[_<yaw>][_s<shape>].png" under the subject directory.
std::string output_name(std::string_view subject, std::string_view stem, Variant variant,
                        std::optional<double> yaw, std::optional<int> shape_id);

/// Shortest decimal form: integral values without a fraction ("-40", "0", "12.5").
std::string format_yaw(double yaw);

} // namespace facesynth::augment
