#include "facesynth/pipeline/extract.hpp"

#include "facesynth/augment/alignment.hpp"
#include "facesynth/error.hpp"
#include "facesynth/eval/benchmark.hpp"
#include "facesynth/geometry/landmarks.hpp"
#include "facesynth/render/png_io.hpp"
#include "facesynth/synth/novel_views.hpp"
#include "facesynth/util/parallel.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>

namespace facesynth::pipeline {

namespace fs = std::filesystem;

namespace {

struct ItemOutput
{
    std::vector<features::FeatureVector> features;
    std::optional<double> yaw;
    std::string log;
};

std::vector<float> to_float(const std::vector<double>& v)
{
    return std::vector<float>(v.begin(), v.end());
}

} // namespace

ExtractResult extract_embeddings(const fs::path& input_root, const geometry::Mesh& generic,
                                 const features::EmbeddingBackend& backend, const ExtractConfig& config)
{
    if (!fs::is_directory(input_root)) {
        throw Error(ErrorCode::io_error, "input root " + input_root.string() + " is not a directory");
    }
    std::vector<fs::path> images;
    for (const auto& e : fs::recursive_directory_iterator(input_root)) {
        std::string ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (e.is_regular_file() && ext == ".png") {
            images.push_back(e.path());
        }
    }
    std::sort(images.begin(), images.end());
    if (images.empty()) {
        throw Error(ErrorCode::empty_input, "no images under " + input_root.string());
    }

    synth::CanvasSpec canvas;
    canvas.size = config.canvas_size;
    const auto templates = augment::make_alignment_templates(generic, canvas);
    std::vector<ItemOutput> outputs(images.size());
    const unsigned workers = config.workers == 0 ? util::default_workers() : config.workers;
    util::parallel_for(images.size(), workers, [&](std::size_t i) {
        const fs::path& path = images[i];
        const std::string id = fs::relative(path, input_root).replace_extension().generic_string();
        const auto image = render::read_png(path.string());
        ItemOutput& out = outputs[i];
        const fs::path pts = fs::path(path).replace_extension(".pts");
        if (!fs::exists(pts)) {
            out.features.push_back(backend.embed(image, id));
            return;
        }
        try {
            const auto landmarks = geometry::read_landmarks(pts.string());
            synth::NovelViewOptions options;
            options.canvas = canvas;
            options.match_source_sign = false;
            std::vector<double> views;
            if (config.render_views) {
                views.assign(eval::rendered_views.begin(), eval::rendered_views.end());
            }
            const auto nv = synth::render_novel_views(image, landmarks, generic, views, options);
            const auto aligned = augment::align_in_plane(
                image, landmarks, augment::classify_alignment(nv.source_angles.yaw, config.frontal_threshold),
                templates);
            out.yaw = nv.source_angles.yaw;
            out.features.push_back(backend.embed(aligned.image, id));
            for (std::size_t k = 0; k < nv.views.size(); ++k) {
                const auto view_id = eval::rendered_id(id, static_cast<int>(nv.yaws[k]));
                out.features.push_back(backend.embed(nv.views[k].image, view_id));
            }
        } catch (const Error& e) {
            std::optional<augment::BoundingBox> box;
            const fs::path bbox = fs::path(path).replace_extension(".bbox");
            if (fs::exists(bbox)) {
                box = augment::read_bounding_box(bbox.string());
            }
            out.features.clear();
            out.features.push_back(backend.embed(augment::crop_fallback(image, box, config.canvas_size).image, id));
            out.log = id + " fallback=" + (box ? "bbox" : "center_crop") + " reason=" + e.what();
        }
    });

    ExtractResult result;
    result.table.dimension = backend.dimension();
    for (std::size_t i = 0; i < images.size(); ++i) {
        for (auto& f : outputs[i].features) {
            result.table.insert(f.source_id, to_float(f.values));
        }
        if (outputs[i].yaw) {
            result.yaws[outputs[i].features.front().source_id] = *outputs[i].yaw;
        }
        if (!outputs[i].log.empty()) {
            result.log.push_back(outputs[i].log);
        }
    }
    return result;
}

} // namespace facesynth::pipeline
