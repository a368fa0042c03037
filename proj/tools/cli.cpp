#include "cli.hpp"

#include "facesynth/augment/augment.hpp"
#include "facesynth/error.hpp"
#include "facesynth/eval/benchmark.hpp"
#include "facesynth/features/conditioning.hpp"
#include "facesynth/geometry/landmarks.hpp"
#include "facesynth/geometry/pose_estimation.hpp"
#include "facesynth/geometry/rotation.hpp"
#include "facesynth/matching/fusion.hpp"
#include "facesynth/pipeline/extract.hpp"
#include "facesynth/render/png_io.hpp"
#include "facesynth/synth/assets.hpp"
#include "facesynth/synth/novel_views.hpp"
#include "facesynth/util/csv.hpp"
#include "facesynth/util/hash.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

namespace facesynth::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

struct GlobalOptions
{
    std::string data_dir = FACESYNTH_DATA_DIR;
    std::string shapes;
    std::string blendshapes;
    unsigned workers = 0;

    std::string shapes_dir() const { return shapes.empty() ? (fs::path(data_dir) / "shapes").string() : shapes; }
    std::string blendshapes_dir() const
    {
        return blendshapes.empty() ? (fs::path(data_dir) / "blendshapes").string() : blendshapes;
    }
};

std::string g17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string g6(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        throw Error(ErrorCode::io_error, "cannot write " + path.string());
    }
}

std::uint64_t hash_tree(const fs::path& root)
{
    std::vector<fs::path> files;
    if (fs::is_directory(root)) {
        for (const auto& e : fs::recursive_directory_iterator(root)) {
            if (e.is_regular_file()) {
                files.push_back(e.path());
            }
        }
    }
    std::sort(files.begin(), files.end());
    std::string acc;
    for (const auto& f : files) {
        acc += fs::relative(f, root).generic_string();
        acc += ':';
        acc += util::to_hex(util::hash_file(f.string()));
        acc += '\n';
    }
    return util::fnv1a64(std::string_view(acc));
}

std::map<std::string, double> read_yaws(const std::string& path)
{
    const auto rows = util::read_csv(path);
    std::map<std::string, double> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() < 2) {
            throw Error(ErrorCode::invalid_input, path + ": malformed row " + std::to_string(r + 1));
        }
        try {
            out[rows[r][0]] = std::stod(rows[r][1]);
        } catch (const std::exception&) {
            throw Error(ErrorCode::invalid_input, path + ": bad yaw '" + rows[r][1] + "'");
        }
    }
    return out;
}

void write_yaws(const std::string& path, const std::map<std::string, double>& yaws)
{
    std::string s = "item_id,yaw\n";
    for (const auto& [id, yaw] : yaws) {
        s += util::format_csv_row({id, g17(yaw)}) + '\n';
    }
    write_file(path, s);
}

struct PoseArgs
{
    std::string image;
    std::string landmarks;
    int shape_id = 0;
};

int run_pose(const PoseArgs& a, const GlobalOptions& g, std::ostream& out)
{
    const auto shapes = synth::load_shape_set(g.shapes_dir());
    const auto image = render::read_png(a.image);
    const auto landmarks = geometry::read_landmarks(a.landmarks);
    const auto est = geometry::estimate_pose(landmarks, shapes.at(a.shape_id), {image.width(), image.height()});
    const auto angles = geometry::decompose_rotation(est.pose.rotation);
    ordered_json j;
    j["yaw"] = angles.yaw;
    j["pitch"] = angles.pitch;
    j["roll"] = angles.roll;
    j["residual"] = est.residual;
    j["focal"] = est.intrinsics.focal;
    j["reliable"] = angles.reliable;
    out << j.dump() << "\n";
    return success;
}

struct RenderArgs
{
    std::string image;
    std::string landmarks;
    std::string out;
    std::vector<double> yaws{0.0, 40.0, 75.0};
    int shape_id = 0;
    int size = 256;
    bool exact_yaws = false;
};

int run_render(const RenderArgs& a, const GlobalOptions& g, std::ostream& out)
{
    const auto shapes = synth::load_shape_set(g.shapes_dir());
    const auto image = render::read_png(a.image);
    const auto landmarks = geometry::read_landmarks(a.landmarks);
    synth::NovelViewOptions options;
    options.canvas.size = a.size;
    options.match_source_sign = !a.exact_yaws;
    auto views = synth::render_novel_views(image, landmarks, shapes.at(a.shape_id), a.yaws, options);
    fs::create_directories(a.out);
    const std::string stem = fs::path(a.image).stem().string();
    for (std::size_t k = 0; k < views.views.size(); ++k) {
        auto& v = views.views[k];
        render::quantize(v.image);
        const fs::path path = fs::path(a.out) / (stem + "_render_" + augment::format_yaw(views.yaws[k]) + ".png");
        render::write_png(path.string(), v.image);
        ordered_json j;
        j["path"] = path.generic_string();
        j["yaw"] = views.yaws[k];
        j["mask_area"] = v.mask_area();
        j["symmetry_skipped"] = v.symmetry_skipped;
        out << j.dump() << "\n";
    }
    return success;
}

struct AugmentArgs
{
    std::string in;
    std::string out;
    augment::AugmentConfig config;
    bool no_expression = false;
    bool no_shapes = false;
};

int run_augment(AugmentArgs a, const GlobalOptions& g, std::ostream& out)
{
    a.config.expression = !a.no_expression;
    a.config.shapes = !a.no_shapes;
    a.config.workers = g.workers;
    a.config.validate();
    const auto shapes = synth::load_shape_set(g.shapes_dir());
    const auto basis = synth::load_blendshape_basis(g.blendshapes_dir());
    const auto summary = augment::augment_dataset(a.in, a.out, shapes, basis, a.config);
    out << "entries " << summary.entries << ", processed " << summary.processed << ", fallback " << summary.fallback
        << ", skipped " << summary.skipped << ", rows " << summary.manifest.size() << "\n";
    return success;
}

struct EmbedArgs
{
    std::string in;
    std::string out;
    std::string yaws_out;
    bool no_views = false;
    int size = 256;
};

int run_embed(const EmbedArgs& a, const GlobalOptions& g, std::ostream& out, std::ostream& err)
{
    const auto shapes = synth::load_shape_set(g.shapes_dir());
    features::ToyBackend backend;
    pipeline::ExtractConfig config;
    config.render_views = !a.no_views;
    config.canvas_size = a.size;
    config.workers = g.workers;
    const auto result = pipeline::extract_embeddings(a.in, shapes.at(0), backend, config);
    for (const auto& line : result.log) {
        err << line << "\n";
    }
    features::write_embeddings(a.out, result.table);
    if (!a.yaws_out.empty()) {
        write_yaws(a.yaws_out, result.yaws);
    }
    out << "embeddings " << result.table.vectors.size() << ", dimension " << result.table.dimension << ", fallbacks "
        << result.log.size() << "\n";
    return success;
}

struct PcaArgs
{
    std::string embeddings;
    std::string train;
    std::string protocol;
    std::string out;
};

int run_pca(const PcaArgs& a, std::ostream& out)
{
    if (a.train.empty() == a.protocol.empty()) {
        throw Error(ErrorCode::invalid_input, "give exactly one of --train and --protocol");
    }
    eval::Protocol protocol;
    if (!a.protocol.empty()) {
        protocol = eval::load_protocol_dir(a.protocol);
    } else {
        const auto rows = util::read_csv(a.train);
        for (std::size_t r = 1; r < rows.size(); ++r) {
            if (!rows[r].empty() && !rows[r][0].empty()) {
                protocol.train_items.push_back(rows[r][0]);
            }
        }
    }
    const auto table = features::read_embeddings(a.embeddings);
    const auto model = eval::fit_conditioning(protocol, table);
    features::write_pca(a.out, model);
    out << "pca_hash " << util::to_hex(features::pca_hash(model)) << ", dimension " << model.dimension() << "\n";
    return success;
}

struct MatchOptions
{
    std::string strategy = "softmax";
    double root_exponent = features::default_root_exponent;
    bool no_rendered = false;
    bool no_in_plane = false;
    bool no_video_pooling = false;
    std::string yaws;
    std::string scores_csv;

    eval::BenchmarkConfig config(unsigned workers) const
    {
        eval::BenchmarkConfig c;
        c.matcher.fusion.strategy = matching::parse_strategy(strategy);
        c.matcher.use_rendered = !no_rendered;
        c.matcher.use_in_plane = !no_in_plane;
        c.video_pooling = !no_video_pooling;
        c.root_exponent = root_exponent;
        c.workers = workers;
        return c;
    }
};

struct MatchArgs
{
    std::string probe;
    std::string gallery;
    std::string embeddings;
    std::string pca;
    MatchOptions options;
};

int run_match(const MatchArgs& a, const GlobalOptions& g, std::ostream& out)
{
    eval::Protocol protocol;
    protocol.templates.push_back(eval::load_template_file(a.probe));
    protocol.templates.push_back(eval::load_template_file(a.gallery));
    if (!a.options.yaws.empty()) {
        protocol.yaws = read_yaws(a.options.yaws);
    }
    const auto config = a.options.config(g.workers);
    const auto table = features::read_embeddings(a.embeddings);
    std::optional<features::PCAModel> pca;
    if (!a.pca.empty()) {
        pca = features::read_pca(a.pca);
    }
    const auto p = eval::build_template_features(protocol.templates[0], protocol, table, pca ? &*pca : nullptr, config);
    const auto q = eval::build_template_features(protocol.templates[1], protocol, table, pca ? &*pca : nullptr, config);
    const auto result = matching::template_similarity(p, q, config.matcher);
    if (!a.options.scores_csv.empty()) {
        std::vector<std::string> rows;
        std::vector<std::string> cols;
        for (const auto& i : p.items) {
            if (i.in_plane) {
                rows.push_back(i.item_id);
            }
        }
        for (const auto& i : q.items) {
            if (i.in_plane) {
                cols.push_back(i.item_id);
            }
        }
        write_file(a.options.scores_csv, matching::score_matrix_csv(matching::in_plane_scores(p, q), rows, cols));
    }
    out << g17(result.score) << "\n";
    return success;
}

struct EvalArgs
{
    std::string protocol;
    std::string embeddings;
    std::string report;
    bool no_pca = false;
    MatchOptions options;
};

int run_eval(const EvalArgs& a, const GlobalOptions& g, std::ostream& out)
{
    auto protocol = eval::load_protocol_dir(a.protocol);
    if (!a.options.yaws.empty()) {
        protocol.yaws = read_yaws(a.options.yaws);
    }
    auto config = a.options.config(g.workers);
    config.use_pca = !a.no_pca;
    const auto table = features::read_embeddings(a.embeddings);
    const auto report = eval::run_benchmark(protocol, table, config);
    write_file(a.report, eval::report_json(report));
    if (!a.options.scores_csv.empty()) {
        std::string s = "template_a,template_b,label,fold,score\n";
        for (std::size_t i = 0; i < protocol.pairs.size(); ++i) {
            const auto& p = protocol.pairs[i];
            s += util::format_csv_row({p.template_a, p.template_b, p.same_subject ? "1" : "0", std::to_string(p.fold),
                                       g17(report.pair_scores[i])}) +
                 '\n';
        }
        write_file(a.options.scores_csv, s);
    }
    out << eval::report_table(report);
    return success;
}

struct BenchFusionArgs
{
    std::string scores;
    int beta_max = matching::default_beta_max;
};

int run_bench_fusion(const BenchFusionArgs& a, std::ostream& out)
{
    const auto rows = util::read_csv(a.scores);
    if (rows.empty()) {
        throw Error(ErrorCode::invalid_input, a.scores + " is empty");
    }
    const auto& header = rows.front();
    const auto set_col = std::find(header.begin(), header.end(), "set_id");
    const auto score_col = std::find(header.begin(), header.end(), "score");
    if (set_col == header.end() || score_col == header.end()) {
        throw Error(ErrorCode::invalid_input, a.scores + " needs set_id and score columns");
    }
    const auto si = static_cast<std::size_t>(set_col - header.begin());
    const auto ci = static_cast<std::size_t>(score_col - header.begin());
    std::vector<std::string> order;
    std::map<std::string, std::vector<double>> sets;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() <= std::max(si, ci)) {
            throw Error(ErrorCode::invalid_input, a.scores + ": row " + std::to_string(r + 1) + " is too short");
        }
        double v = 0.0;
        try {
            std::size_t used = 0;
            v = std::stod(rows[r][ci], &used);
            if (used != rows[r][ci].size()) {
                throw std::invalid_argument("trailing characters");
            }
        } catch (const std::exception&) {
            throw Error(ErrorCode::invalid_input, a.scores + ": bad score '" + rows[r][ci] + "'");
        }
        auto [it, fresh] = sets.try_emplace(rows[r][si]);
        if (fresh) {
            order.push_back(rows[r][si]);
        }
        it->second.push_back(v);
    }
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-16s %6s %10s %10s %10s %10s\n", "set", "n", "min", "max", "mean", "softmax");
    out << buf;
    for (const auto& id : order) {
        const auto& s = sets[id];
        std::snprintf(buf, sizeof buf, "%-16s %6zu %10s %10s %10s %10s\n", id.c_str(), s.size(),
                      g6(matching::baseline_pool(s, matching::Strategy::min)).c_str(),
                      g6(matching::baseline_pool(s, matching::Strategy::max)).c_str(),
                      g6(matching::baseline_pool(s, matching::Strategy::mean)).c_str(),
                      g6(matching::fuse_scores(s, 0, a.beta_max)).c_str());
        out << buf;
    }
    return success;
}

void add_match_options(CLI::App* sub, MatchOptions& o)
{
    sub->add_option("--strategy", o.strategy, "min, max, mean or softmax")
        ->check(CLI::IsMember({"min", "max", "mean", "softmax"}))
        ->capture_default_str();
    sub->add_option("--root-exponent", o.root_exponent, "root normalisation exponent")
        ->check(CLI::Range(1e-9, 1.0))
        ->capture_default_str();
    sub->add_flag("--no-rendered", o.no_rendered, "ignore rendered-view features");
    sub->add_flag("--no-in-plane", o.no_in_plane, "ignore in-plane features");
    sub->add_flag("--no-video-pooling", o.no_video_pooling, "keep video frames separate");
    sub->add_option("--yaws", o.yaws, "CSV item_id,yaw (overrides the protocol's yaws.csv)");
    sub->add_option("--scores-csv", o.scores_csv, "write scores as CSV");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Face data augmentation and template matching pipeline", "facesynth"};
    app.config_formatter(std::make_shared<CLI::ConfigINI>());
    app.set_config("--config", "", "INI file with [section] key = value settings; flags override it");
    app.require_subcommand(0, 1);
    app.fallthrough();

    GlobalOptions g;
    bool show_version = false;
    app.add_flag("--version", show_version, "print artifact and data hashes");
    app.add_option("--data", g.data_dir, "data asset directory")->capture_default_str();
    app.add_option("--shapes", g.shapes, "shape set directory (default DATA/shapes)");
    app.add_option("--blendshapes", g.blendshapes, "blendshape directory (default DATA/blendshapes)");
    app.add_option("--workers", g.workers, "worker threads, 0 = all cores")->capture_default_str();

    PoseArgs pose;
    auto* pose_cmd = app.add_subcommand("pose", "estimate head pose, print one JSON line");
    pose_cmd->add_option("--image", pose.image)->required()->check(CLI::ExistingFile);
    pose_cmd->add_option("--landmarks", pose.landmarks)->required()->check(CLI::ExistingFile);
    pose_cmd->add_option("--shape-id", pose.shape_id)->check(CLI::Range(0, synth::shape_count - 1));

    RenderArgs render_args;
    auto* render_cmd = app.add_subcommand("render", "render novel views of one image");
    render_cmd->add_option("--image", render_args.image)->required()->check(CLI::ExistingFile);
    render_cmd->add_option("--landmarks", render_args.landmarks)->required()->check(CLI::ExistingFile);
    render_cmd->add_option("--out", render_args.out, "output directory")->required();
    render_cmd->add_option("--yaws", render_args.yaws)->delimiter(',')->capture_default_str();
    render_cmd->add_option("--shape-id", render_args.shape_id)->check(CLI::Range(0, synth::shape_count - 1));
    render_cmd->add_option("--size", render_args.size)->check(CLI::Range(16, 4096))->capture_default_str();
    render_cmd->add_flag("--exact-yaws", render_args.exact_yaws, "do not sign yaws to match the source");

    AugmentArgs aug;
    auto* aug_cmd = app.add_subcommand("augment", "augment a labelled face dataset");
    aug_cmd->add_option("--in", aug.in, "input root, one directory per subject")->required()->check(CLI::ExistingDirectory);
    aug_cmd->add_option("--out", aug.out, "output root")->required();
    aug_cmd->add_option("--seed", aug.config.seed)->capture_default_str();
    aug_cmd->add_option("--yaws", aug.config.yaws)->delimiter(',')->capture_default_str();
    aug_cmd->add_option("--size", aug.config.output_size)->check(CLI::Range(16, 4096))->capture_default_str();
    aug_cmd->add_option("--frontal-threshold", aug.config.frontal_threshold)->capture_default_str();
    aug_cmd->add_flag("--no-expression", aug.no_expression, "skip the expression variant");
    aug_cmd->add_flag("--no-shapes", aug.no_shapes, "render every view on shape 0");

    EmbedArgs embed;
    auto* embed_cmd = app.add_subcommand("embed", "embed images (toy backend) into an EMB1 file");
    embed_cmd->add_option("--in", embed.in, "image root")->required()->check(CLI::ExistingDirectory);
    embed_cmd->add_option("--out", embed.out, "EMB1 output file")->required();
    embed_cmd->add_option("--yaws-out", embed.yaws_out, "CSV of estimated yaws");
    embed_cmd->add_flag("--no-views", embed.no_views, "skip rendered-view embeddings");
    embed_cmd->add_option("--size", embed.size)->check(CLI::Range(16, 4096))->capture_default_str();

    PcaArgs pca;
    auto* pca_cmd = app.add_subcommand("pca", "fit the conditioning PCA on training items");
    pca_cmd->add_option("--embeddings", pca.embeddings)->required()->check(CLI::ExistingFile);
    pca_cmd->add_option("--train", pca.train, "CSV with an item_id column")->check(CLI::ExistingFile);
    pca_cmd->add_option("--protocol", pca.protocol, "protocol directory (uses train.csv)")->check(CLI::ExistingDirectory);
    pca_cmd->add_option("--out", pca.out, "PCA1 output file")->required();

    MatchArgs match;
    auto* match_cmd = app.add_subcommand("match", "similarity of two templates");
    match_cmd->add_option("--probe-template", match.probe, "templates.csv-style file")->required()->check(CLI::ExistingFile);
    match_cmd->add_option("--gallery-template", match.gallery, "templates.csv-style file")
        ->required()
        ->check(CLI::ExistingFile);
    match_cmd->add_option("--embeddings", match.embeddings)->required()->check(CLI::ExistingFile);
    match_cmd->add_option("--pca", match.pca, "PCA1 model applied before matching")->check(CLI::ExistingFile);
    add_match_options(match_cmd, match.options);

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "run a verification/identification protocol");
    eval_cmd->add_option("--protocol", ev.protocol)->required()->check(CLI::ExistingDirectory);
    eval_cmd->add_option("--embeddings", ev.embeddings)->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--report", ev.report, "report.json output")->required();
    eval_cmd->add_flag("--no-pca", ev.no_pca, "skip PCA and root normalisation");
    add_match_options(eval_cmd, ev.options);

    BenchFusionArgs bench;
    auto* bench_cmd = app.add_subcommand("bench-fusion", "pool score sets with every fusion strategy");
    bench_cmd->add_option("--scores", bench.scores, "CSV with set_id,score columns")->required()->check(CLI::ExistingFile);
    bench_cmd->add_option("--beta-max", bench.beta_max)->check(CLI::Range(0, 1000))->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return success;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return success;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return input_error;
    }

    try {
        if (show_version) {
            std::string artifact = "unknown";
            if (fs::exists("/proc/self/exe")) {
                artifact = util::to_hex(util::hash_file(fs::read_symlink("/proc/self/exe").string()));
            }
            out << "facesynth " << version << "\n"
                << "artifact " << artifact << "\n"
                << "data " << util::to_hex(hash_tree(g.data_dir)) << "\n";
            return success;
        }
        if (pose_cmd->parsed()) {
            return run_pose(pose, g, out);
        }
        if (render_cmd->parsed()) {
            return run_render(render_args, g, out);
        }
        if (aug_cmd->parsed()) {
            return run_augment(aug, g, out);
        }
        if (embed_cmd->parsed()) {
            return run_embed(embed, g, out, err);
        }
        if (pca_cmd->parsed()) {
            return run_pca(pca, out);
        }
        if (match_cmd->parsed()) {
            return run_match(match, g, out);
        }
        if (eval_cmd->parsed()) {
            return run_eval(ev, g, out);
        }
        if (bench_cmd->parsed()) {
            return run_bench_fusion(bench, out);
        }
        err << app.help();
        return input_error;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return internal_failure;
    }
}

} // namespace facesynth::cli
