#include "facesynth/augment/augment.hpp"

#include "facesynth/error.hpp"
#include "facesynth/geometry/landmarks.hpp"
#include "facesynth/render/png_io.hpp"
#include "facesynth/synth/expression.hpp"
#include "facesynth/synth/novel_views.hpp"
#include "facesynth/util/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace facesynth::augment {

namespace fs = std::filesystem;

namespace {

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string fixed2(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

AugmentedImage fallback_image(const DatasetEntry& entry, const render::RasterImage& image, const AugmentConfig& config,
                              const std::string& reason, std::vector<std::string>& log)
{
    AugmentedImage out;
    const auto crop = crop_fallback(image, entry.bbox, config.output_size);
    out.image = crop.image;
    out.row.output_path = output_name(entry.subject_label, entry.stem, Variant::aligned, std::nullopt, std::nullopt);
    out.row.subject_label = entry.subject_label;
    out.row.source_path = entry.source_path;
    out.row.variant = Variant::aligned;
    out.row.alignment = Alignment::bbox_fallback;
    log.push_back(entry.source_path + " fallback=" + (entry.bbox ? "bbox" : "center_crop") + " reason=" + reason);
    return out;
}

} // namespace

void AugmentConfig::validate() const
{
    if (!(frontal_threshold > 0.0 && frontal_threshold < 90.0)) {
        throw Error(ErrorCode::invalid_input, "frontal threshold must lie in (0, 90) degrees");
    }
    if (yaws.empty()) {
        throw Error(ErrorCode::invalid_input, "yaw set is empty");
    }
    for (double y : yaws) {
        if (!std::isfinite(y) || std::abs(y) >= 90.0) {
            throw Error(ErrorCode::invalid_input, "render yaws must be finite and within (-90, 90)");
        }
    }
    if (output_size < 16) {
        throw Error(ErrorCode::invalid_input, "output size must be at least 16");
    }
}

std::vector<DatasetEntry> scan_dataset(const fs::path& input_root)
{
    if (!fs::is_directory(input_root)) {
        throw Error(ErrorCode::io_error, "input root " + input_root.string() + " is not a directory");
    }
    std::vector<fs::path> subjects;
    for (const auto& d : fs::directory_iterator(input_root)) {
        if (d.is_directory()) {
            subjects.push_back(d.path());
        }
    }
    std::sort(subjects.begin(), subjects.end());
    std::vector<DatasetEntry> entries;
    for (const auto& subject : subjects) {
        std::vector<fs::path> images;
        for (const auto& f : fs::directory_iterator(subject)) {
            if (f.is_regular_file() && lower(f.path().extension().string()) == ".png") {
                images.push_back(f.path());
            }
        }
        std::sort(images.begin(), images.end());
        for (const auto& image : images) {
            DatasetEntry e;
            e.subject_label = subject.filename().string();
            e.image_path = image;
            e.stem = image.stem().string();
            e.landmark_path = fs::path(image).replace_extension(".pts");
            e.source_path = e.subject_label + "/" + image.filename().string();
            const fs::path bbox = fs::path(image).replace_extension(".bbox");
            if (fs::exists(bbox)) {
                e.bbox = read_bounding_box(bbox.string());
            }
            entries.push_back(std::move(e));
        }
    }
    if (entries.empty()) {
        throw Error(ErrorCode::empty_input, "no images under " + input_root.string());
    }
    return entries;
}

AugmentAssets make_augment_assets(const synth::ShapeSet& shapes, const synth::BlendshapeBasis& basis,
                                  const AugmentConfig& config)
{
    synth::CanvasSpec canvas;
    canvas.size = config.output_size;
    return AugmentAssets{shapes, basis, make_alignment_templates(shapes.at(0), canvas)};
}

EntryResult augment_image(const DatasetEntry& entry, const AugmentAssets& assets, const AugmentConfig& config)
{
    EntryResult result;
    render::RasterImage image;
    try {
        image = render::read_png(entry.image_path.string());
    } catch (const Error& e) {
        result.status = EntryStatus::skipped;
        result.log.push_back(entry.source_path + " skipped reason=" + e.what());
        return result;
    }

    std::string failure;
    std::optional<geometry::LandmarkSet2D> landmarks;
    std::optional<synth::NovelViews> views;
    std::optional<AlignedImage> aligned;
    const int shape_id =
        config.shapes ? synth::pick_shape(config.seed, entry.subject_label + "/" + entry.stem) : 0;
    try {
        landmarks = geometry::read_landmarks(entry.landmark_path.string());
        synth::NovelViewOptions options;
        options.canvas.size = config.output_size;
        views = synth::render_novel_views(image, *landmarks, assets.shapes.at(shape_id), config.yaws, options);
        aligned = align_in_plane(image, *landmarks,
                                 classify_alignment(views->source_angles.yaw, config.frontal_threshold),
                                 assets.templates);
    } catch (const Error& e) {
        failure = e.what();
    }

    if (!aligned) {
        if (!config.fallback) {
            result.status = EntryStatus::skipped;
            result.log.push_back(entry.source_path + " skipped reason=" + failure);
            return result;
        }
        result.status = EntryStatus::fallback;
        result.images.push_back(fallback_image(entry, image, config, failure, result.log));
        return result;
    }

    const std::optional<int> shape_field = config.shapes ? std::optional<int>(shape_id) : std::nullopt;
    auto make_row = [&](Variant v, std::optional<double> yaw, std::optional<int> shape,
                        std::optional<Alignment> alignment) {
        ManifestRow row;
        row.output_path = output_name(entry.subject_label, entry.stem, v, yaw, shape);
        row.subject_label = entry.subject_label;
        row.source_path = entry.source_path;
        row.variant = v;
        row.yaw = yaw;
        row.shape_id = shape;
        row.alignment = alignment;
        return row;
    };

    result.images.push_back({aligned->image, make_row(Variant::aligned, std::nullopt, std::nullopt, aligned->alignment)});
    for (std::size_t k = 0; k < views->views.size(); ++k) {
        result.images.push_back(
            {views->views[k].image, make_row(Variant::pose_render, views->yaws[k], shape_field, std::nullopt)});
    }
    std::string line = entry.source_path + " ok yaw=" + fixed2(views->source_angles.yaw) +
                       " alignment=" + to_string(aligned->alignment);
    if (config.shapes) {
        line += " shape=" + std::to_string(shape_id);
    }
    result.log.push_back(line);

    if (config.expression) {
        const auto neutral =
            synth::neutralize_expression(image, *landmarks, assets.basis.neutral, assets.basis);
        if (neutral.skipped) {
            result.log.push_back(entry.source_path + " expression_skipped reason=" + neutral.skip_reason);
        }
        result.images.push_back(
            {render::warp_similarity(neutral.image, aligned->transform, assets.templates.size, assets.templates.size),
             make_row(Variant::expression, std::nullopt, std::nullopt, aligned->alignment)});
    }
    return result;
}

AugmentSummary augment_dataset(const fs::path& input_root, const fs::path& output_root,
                               const synth::ShapeSet& shapes, const synth::BlendshapeBasis& basis,
                               const AugmentConfig& config)
{
    config.validate();
    shapes.validate();
    basis.validate();
    const auto entries = scan_dataset(input_root);
    const auto assets = make_augment_assets(shapes, basis, config);

    fs::create_directories(output_root);
    for (const auto& e : entries) {
        fs::create_directories(output_root / e.subject_label);
    }

    std::vector<EntryResult> results(entries.size());
    const unsigned workers = config.workers == 0 ? util::default_workers() : config.workers;
    util::parallel_for(entries.size(), workers, [&](std::size_t i) {
        EntryResult r = augment_image(entries[i], assets, config);
        for (auto& img : r.images) {
            render::quantize(img.image);
            render::write_png((output_root / img.row.output_path).string(), img.image);
            img.image = render::RasterImage();
        }
        results[i] = std::move(r);
    });

    AugmentSummary summary;
    summary.entries = static_cast<int>(entries.size());
    std::vector<std::string> log;
    for (const auto& r : results) {
        switch (r.status) {
        case EntryStatus::processed:
            ++summary.processed;
            break;
        case EntryStatus::fallback:
            ++summary.fallback;
            break;
        case EntryStatus::skipped:
            ++summary.skipped;
            break;
        }
        for (const auto& img : r.images) {
            summary.manifest.push_back(img.row);
        }
        log.insert(log.end(), r.log.begin(), r.log.end());
    }
    std::sort(summary.manifest.begin(), summary.manifest.end(), manifest_less);
    write_manifest((output_root / "manifest.jsonl").string(), summary.manifest);

    std::ofstream out(output_root / "augment.log", std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::io_error, "cannot write " + (output_root / "augment.log").string());
    }
    for (const auto& line : log) {
        out << line << '\n';
    }
    out << "entries=" << summary.entries << " processed=" << summary.processed << " fallback=" << summary.fallback
        << " skipped=" << summary.skipped << " rows=" << summary.manifest.size() << '\n';
    return summary;
}

} // namespace facesynth::augment
