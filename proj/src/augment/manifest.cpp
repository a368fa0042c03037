#include "facesynth/augment/manifest.hpp"

#include "facesynth/error.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <tuple>

namespace facesynth::augment {

namespace {

using ordered_json = nlohmann::ordered_json;

Variant parse_variant(const std::string& s)
{
    for (Variant v : {Variant::aligned, Variant::pose_render, Variant::expression}) {
        if (s == to_string(v)) {
            return v;
        }
    }
    throw Error(ErrorCode::invalid_input, "unknown variant '" + s + "'");
}

Alignment parse_alignment(const std::string& s)
{
    for (Alignment a : {Alignment::frontal9, Alignment::profile2, Alignment::bbox_fallback}) {
        if (s == to_string(a)) {
            return a;
        }
    }
    throw Error(ErrorCode::invalid_input, "unknown alignment '" + s + "'");
}

} // namespace

const char* to_string(Variant v) noexcept
{
    switch (v) {
    case Variant::aligned:
        return "aligned";
    case Variant::pose_render:
        return "pose_render";
    case Variant::expression:
        return "expression";
    }
    return "unknown";
}

bool manifest_less(const ManifestRow& a, const ManifestRow& b)
{
    const double ya = a.yaw.value_or(-1e9);
    const double yb = b.yaw.value_or(-1e9);
    return std::tie(a.subject_label, a.source_path, a.variant, ya, a.output_path) <
           std::tie(b.subject_label, b.source_path, b.variant, yb, b.output_path);
}

std::string format_manifest_row(const ManifestRow& row)
{
    ordered_json j;
    j["output_path"] = row.output_path;
    j["subject_label"] = row.subject_label;
    j["source_path"] = row.source_path;
    j["variant"] = to_string(row.variant);
    j["yaw"] = row.yaw ? ordered_json(*row.yaw) : ordered_json(nullptr);
    j["shape_id"] = row.shape_id ? ordered_json(*row.shape_id) : ordered_json(nullptr);
    j["alignment"] = row.alignment ? ordered_json(to_string(*row.alignment)) : ordered_json(nullptr);
    return j.dump();
}

ManifestRow parse_manifest_row(std::string_view line)
{
    ordered_json j;
    try {
        j = ordered_json::parse(line);
        ManifestRow row;
        row.output_path = j.at("output_path").get<std::string>();
        row.subject_label = j.at("subject_label").get<std::string>();
        row.source_path = j.at("source_path").get<std::string>();
        row.variant = parse_variant(j.at("variant").get<std::string>());
        if (!j.at("yaw").is_null()) {
            row.yaw = j["yaw"].get<double>();
        }
        if (!j.at("shape_id").is_null()) {
            row.shape_id = j["shape_id"].get<int>();
        }
        if (!j.at("alignment").is_null()) {
            row.alignment = parse_alignment(j["alignment"].get<std::string>());
        }
        return row;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::invalid_input, std::string("malformed manifest row: ") + e.what());
    }
}

void write_manifest(const std::string& path, const std::vector<ManifestRow>& rows)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::io_error, "cannot write " + path);
    }
    for (const auto& row : rows) {
        out << format_manifest_row(row) << '\n';
    }
    if (!out) {
        throw Error(ErrorCode::io_error, "failed writing " + path);
    }
}

std::vector<ManifestRow> read_manifest(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::io_error, "cannot open " + path);
    }
    std::vector<ManifestRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!line.empty()) {
            rows.push_back(parse_manifest_row(line));
        }
    }
    return rows;
}

std::string format_yaw(double yaw)
{
    if (yaw == std::round(yaw)) {
        return std::to_string(static_cast<long long>(std::round(yaw)));
    }
    return ordered_json(yaw).dump();
}

std::string output_name(std::string_view subject, std::string_view stem, Variant variant, std::optional<double> yaw,
                        std::optional<int> shape_id)
{
    std::string name(subject);
    name += '/';
    name += stem;
    name += '_';
    name += to_string(variant);
    if (yaw) {
        name += '_' + format_yaw(*yaw);
    }
    if (shape_id) {
        name += "_s" + std::to_string(*shape_id);
    }
    name += ".png";
    return name;
}

} // namespace facesynth::augment
