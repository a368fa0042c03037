#pragma once

#include "facesynth/features/conditioning.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace facesynth::eval {

struct MediaItem
{
    std::string media_id;
    features::MediaType type = features::MediaType::image;
    std::string item_id;
};

struct ProtocolTemplate
{
    std::string template_id;
    std::string subject_id;
    std::vector<MediaItem> items;
};

struct VerificationPair
{
    std::string template_a;
    std::string template_b;
    bool same_subject = false;
    int fold = 0;
};

struct Protocol
{
    /// In first-appearance order of templates.csv.
    std::vector<ProtocolTemplate> templates;
    std::vector<VerificationPair> pairs;
    std::vector<std::string> gallery;
    std::vector<std::string> probes;
    /// Items the feature conditioning may be trained on.
    std::vector<std::string> train_items;
    /// Estimated yaw per item; items without an entry count as frontal.
    std::map<std::string, double> yaws;

    /// Throws protocol_error for an unknown id.
    const ProtocolTemplate& find(const std::string& template_id) const;
};

/**
 * templates.csv: template_id,subject_id,media_id,media_type,item_id (media_type
 * "image" or "video"); pairs.csv: template_a,template_b,label,fold with label
 * 1/0, true/false or same/different. A header row is required in both.
 * Throws protocol_error for conflicting template subjects, repeated items,
 * dangling pair ids, or a non-empty pair list without both classes.
 */
Protocol load_protocol(const std::string& templates_csv, const std::string& pairs_csv);

/// First template of a file in the templates.csv layout.
ProtocolTemplate load_template_file(const std::string& path);

/**
 * Protocol directory: templates.csv plus any of pairs.csv, gallery.csv and
 * probes.csv (column template_id), train.csv (column item_id) and yaws.csv
 * (item_id,yaw). At least one of pairs or gallery+probes must be present.
 */
Protocol load_protocol_dir(const std::filesystem::path& directory);

/// Writes a protocol directory in the layout read by load_protocol_dir.
void write_protocol_dir(const std::filesystem::path& directory, const Protocol& protocol);

} // namespace facesynth::eval
