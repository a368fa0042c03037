// Runs each acceptance criterion and prints one PASS/FAIL line per criterion.
#include "support.hpp"

#include "cli.hpp"

#include "facesynth/augment/augment.hpp"
#include "facesynth/error.hpp"
#include "facesynth/eval/benchmark.hpp"
#include "facesynth/eval/metrics.hpp"
#include "facesynth/features/conditioning.hpp"
#include "facesynth/geometry/pose_estimation.hpp"
#include "facesynth/geometry/rotation.hpp"
#include "facesynth/matching/fusion.hpp"
#include "facesynth/pipeline/extract.hpp"
#include "facesynth/pipeline/synthetic_benchmark.hpp"
#include "facesynth/render/image.hpp"
#include "facesynth/render/rasterizer.hpp"
#include "facesynth/synth/assets.hpp"
#include "facesynth/synth/expression.hpp"
#include "facesynth/synth/synthetic_faces.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

using namespace facesynth;
namespace fs = std::filesystem;

namespace {

struct Outcome
{
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

const synth::ShapeSet& bundled_shapes()
{
    static const auto s = synth::load_shape_set(std::string(FACESYNTH_DATA_DIR) + "/shapes");
    return s;
}

const synth::BlendshapeBasis& bundled_blendshapes()
{
    static const auto b = synth::load_blendshape_basis(std::string(FACESYNTH_DATA_DIR) + "/blendshapes");
    return b;
}

Outcome multiplier()
{
    test::TempDir dir("acc_mult");
    test::write_face_dataset(dir / "in", 20, 5, 1001);
    augment::AugmentConfig config;
    config.seed = 3;
    config.expression = false;
    const auto pose_shape = augment::augment_dataset(dir / "in", dir / "ps", bundled_shapes(), bundled_blendshapes(), config);
    config.expression = true;
    const auto full = augment::augment_dataset(dir / "in", dir / "full", bundled_shapes(), bundled_blendshapes(), config);
    const bool ok = pose_shape.entries == 100 && pose_shape.manifest.size() == 400 && full.manifest.size() == 500 &&
                    full.fallback == 0 && full.skipped == 0;
    return {ok, "100 images -> " + std::to_string(pose_shape.manifest.size()) + " pose+shape rows, " +
                    std::to_string(full.manifest.size()) + " full rows"};
}

Outcome softmax_suite()
{
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst_mean = 0.0;
    double worst_max = 0.0;
    int non_monotone = 0;
    int below_mean = 0;
    int gap_sets = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> s(std::size_t(2 + trial % 40));
        for (auto& x : s) {
            x = u(rng);
        }
        const double mean = std::accumulate(s.begin(), s.end(), 0.0) / double(s.size());
        worst_mean = std::max(worst_mean, std::abs(matching::softmax_pool(s, 0.0) - mean));
        double prev = -std::numeric_limits<double>::infinity();
        for (int beta = 0; beta <= 60; ++beta) {
            const double v = matching::softmax_pool(s, beta);
            non_monotone += v < prev - 1e-12;
            prev = v;
        }
        auto sorted = s;
        std::sort(sorted.rbegin(), sorted.rend());
        if (sorted[0] - sorted[1] >= 0.05) {
            ++gap_sets;
            worst_max = std::max(worst_max, std::abs(matching::softmax_pool(s, 200.0) - sorted[0]));
        }
        below_mean += !(matching::fuse_scores(s) > mean);
    }
    int constant_unequal = 0;
    for (double c : {-0.7, 0.0, 0.31, 0.99}) {
        const std::vector<double> flat(5, c);
        constant_unequal += std::abs(matching::fuse_scores(flat) - c) > 1e-15;
    }
    const bool ok = worst_mean <= 1e-12 && worst_max <= 1e-4 && non_monotone == 0 && below_mean == 0 &&
                    constant_unequal == 0 && gap_sets > 100;
    return {ok, fmt("beta=0 err %.1e, beta=200 err %.1e, ", worst_mean, worst_max) +
                    std::to_string(non_monotone) + " non-monotone, " + std::to_string(below_mean) +
                    " fused<=mean of 1000 sets"};
}

Outcome pose_recovery()
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst_noisy = 0.0;
    double worst_rms = 0.0;
    double worst_clean = 0.0;
    for (int k = 0; k < 100; ++k) {
        const auto id = synth::random_identity(500 + std::uint64_t(k));
        const auto mesh = synth::make_generic_head(id.shape);
        synth::SyntheticCamera cam;
        cam.yaw = 75.0 * u(rng);
        cam.pitch = 10.0 * u(rng);
        cam.roll = 8.0 * u(rng);
        cam.focal = 450.0 + 100.0 * u(rng);
        cam.offset = {10.0 * u(rng), 10.0 * u(rng)};
        const auto face = synth::render_synthetic_face(mesh, test::generic_head(), id.appearance, cam);
        const double truth = geometry::decompose_yaw(face.pose).degrees;

        const auto clean = geometry::estimate_pose(face.landmarks, mesh, {256, 256});
        worst_clean = std::max(worst_clean, std::abs(geometry::decompose_yaw(clean.pose).degrees - truth));

        auto noisy = face.landmarks;
        synth::perturb_landmarks(noisy, 0.5, 900 + std::uint64_t(k));
        const auto est = geometry::estimate_pose(noisy, mesh, {256, 256});
        worst_noisy = std::max(worst_noisy, std::abs(geometry::decompose_yaw(est.pose).degrees - truth));
        worst_rms = std::max(worst_rms, est.residual);
    }
    const bool ok = worst_noisy <= 2.0 && worst_rms <= 1.5 && worst_clean <= 0.1;
    return {ok, fmt("worst yaw error %.3f deg (noisy), %.2e deg (noise-free), worst RMS %.3f px", worst_noisy,
                    worst_clean, worst_rms)};
}

Outcome render_round_trip()
{
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int c = 0; c < 20; ++c) {
        const auto id = synth::random_identity(700 + std::uint64_t(c));
        const auto mesh = synth::make_generic_head(id.shape);
        synth::SyntheticCamera cam;
        cam.yaw = 75.0 * u(rng);
        cam.pitch = 10.0 * u(rng);
        cam.roll = 8.0 * u(rng);
        const auto face = synth::render_synthetic_face(mesh, test::generic_head(), id.appearance, cam);
        const auto pe = geometry::estimate_pose(face.landmarks, mesh, {256, 256});
        const auto tex = render::texture_from_image(mesh, face.image, pe.pose, pe.intrinsics);
        const auto r = render::rasterize(mesh, tex, face.image, pe.pose, pe.intrinsics);
        std::vector<std::uint8_t> visible(r.mask.size());
        for (std::size_t i = 0; i < visible.size(); ++i) {
            visible[i] = r.mask[i] && r.direct_valid[i] && r.mirror_weight[i] == 0.0f;
        }
        worst = std::max(worst, render::mean_absolute_error(r.image, face.image, visible));
    }
    return {worst < 2.0, fmt("worst visible-mask MAE %.3f/255 over 20 faces", worst)};
}

Outcome expression_recovery()
{
    double worst = 0.0;
    std::size_t changed_background = 0;
    int cases = 0;
    for (double c : {0.3, 0.7, 1.0}) {
        for (double yaw : {-25.0, 0.0, 20.0}) {
            const auto id = synth::random_identity(40 + std::uint64_t(cases));
            synth::SyntheticCamera cam;
            cam.yaw = yaw;
            cam.pitch = 5.0;
            const auto face = synth::render_synthetic_face(bundled_blendshapes().instantiate({c, 0.0, 0.0}),
                                                           test::generic_head(), id.appearance, cam);
            const auto out = synth::neutralize_expression(face.image, face.landmarks, bundled_shapes().at(0),
                                                          bundled_blendshapes());
            ++cases;
            if (out.skipped) {
                return {false, "fit skipped: " + out.skip_reason};
            }
            worst = std::max(worst, std::abs(out.fit.coefficients[0] - c));
            for (std::size_t i = 0; i < out.alpha.size(); ++i) {
                if (out.alpha[i] == 0.0f) {
                    for (std::size_t ch = 0; ch < 3; ++ch) {
                        changed_background += out.image.data()[i * 3 + ch] != face.image.data()[i * 3 + ch];
                    }
                }
            }
        }
    }
    return {worst <= 0.05 && changed_background == 0,
            fmt("worst coefficient error %.4f over %g fits, ", worst, cases) + std::to_string(changed_background) +
                " background values changed"};
}

Outcome metric_oracles()
{
    int mismatches = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g;
        std::vector<double> genuine;
        std::vector<double> impostor;
        for (int i = 0; i < 1000; ++i) {
            double v = g(rng) + (i % 4 == 0 ? 1.5 : 0.0);
            if (seed % 2 == 0) {
                v = std::round(v * 25.0) / 25.0;
            }
            (i % 4 == 0 ? genuine : impostor).push_back(v);
        }
        const auto curve = eval::roc(genuine, impostor);
        const auto expect = test::oracle::roc(genuine, impostor);
        if (curve.points.size() != expect.size()) {
            ++mismatches;
        } else {
            for (std::size_t k = 0; k < expect.size(); ++k) {
                mismatches += curve.points[k].threshold != expect[k].threshold || curve.points[k].far != expect[k].far ||
                              curve.points[k].tar != expect[k].tar;
            }
        }
        for (double far : {0.0, 0.001, 0.01, 0.1}) {
            mismatches += eval::tar_at_far(curve, far) != test::oracle::tar_at_far(genuine, impostor, far);
        }
        mismatches += eval::equal_error_rate(genuine, impostor).eer != test::oracle::eer(genuine, impostor);

        // 50 probes x 20 gallery, 1000 scores with coarse ties.
        std::uniform_int_distribution<int> level(0, 12);
        std::vector<std::string> gallery;
        std::vector<std::string> probes;
        for (int k = 0; k < 20; ++k) {
            gallery.push_back("id" + std::to_string(k));
        }
        Eigen::MatrixXd m(50, 20);
        for (int p = 0; p < 50; ++p) {
            probes.push_back(gallery[std::size_t(p % 20)]);
            for (int k = 0; k < 20; ++k) {
                m(p, k) = level(rng) / 12.0 + (k == p % 20 ? 0.2 : 0.0);
            }
        }
        mismatches += eval::cmc(m, probes, gallery).ranks != test::oracle::cmc_ranks(m, probes, gallery);
    }
    return {mismatches == 0, std::to_string(mismatches) + " mismatches against brute force over 50 seeds"};
}

Outcome video_pooling()
{
    using features::MediaType;
    auto tag = [](std::vector<double> v, std::string media, MediaType t) {
        features::TaggedFeature f;
        f.feature.values = std::move(v);
        f.media_id = std::move(media);
        f.type = t;
        return f;
    };
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    int failures = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int videos = 1 + trial % 4;
        const int stills = trial % 3;
        std::vector<features::TaggedFeature> items;
        std::vector<std::vector<double>> sums(std::size_t(videos), std::vector<double>(8, 0.0));
        std::vector<int> frames(std::size_t(videos), 0);
        for (int f = 0; f < 12; ++f) {
            const int v = f % videos;
            std::vector<double> x(8);
            for (auto& e : x) {
                e = g(rng);
            }
            for (std::size_t d = 0; d < 8; ++d) {
                sums[std::size_t(v)][d] += x[d];
            }
            ++frames[std::size_t(v)];
            items.push_back(tag(x, "v" + std::to_string(v), MediaType::video));
            if (f < stills) {
                items.push_back(tag({double(f), 1, 2, 3, 4, 5, 6, 7}, "s" + std::to_string(f), MediaType::image));
            }
        }
        const auto out = features::video_pool(items);
        failures += int(out.size()) != videos + stills;
        for (const auto& o : out) {
            if (o.type == MediaType::video) {
                const auto v = std::size_t(std::stoi(o.media_id.substr(1)));
                for (std::size_t d = 0; d < 8; ++d) {
                    failures += std::abs(o.feature.values[d] - sums[v][d] / frames[v]) > 1e-12;
                }
            }
        }
    }
    const std::vector<features::TaggedFeature> pair{tag({1, 0}, "v", MediaType::video), tag({0, 1}, "v", MediaType::video)};
    const auto two = features::video_pool(pair);
    failures += two.size() != 1 || two[0].feature.values != std::vector<double>{0.5, 0.5};
    return {failures == 0, std::to_string(failures) + " failures over 51 constructed templates"};
}

Outcome end_to_end()
{
    test::TempDir dir("acc_e2e");
    pipeline::SyntheticBenchmarkSpec spec;
    pipeline::write_synthetic_benchmark(dir.path(), spec);
    auto protocol = eval::load_protocol_dir(dir / "protocol");
    const features::ToyBackend toy;
    const auto extracted = pipeline::extract_embeddings(dir / "images", bundled_shapes().at(0), toy);
    protocol.yaws = extracted.yaws;

    eval::BenchmarkConfig full;
    const auto a = eval::run_benchmark(protocol, extracted.table, full);

    eval::BenchmarkConfig baseline;
    baseline.matcher.fusion.strategy = matching::Strategy::mean;
    baseline.matcher.use_rendered = false;
    baseline.video_pooling = false;
    const auto b = eval::run_benchmark(protocol, extracted.table, baseline);

    const double full_rank1 = a.cmc.at(1);
    const double base_rank1 = b.cmc.at(1);
    return {full_rank1 >= base_rank1,
            fmt("rank-1 full %.3f vs in-plane mean baseline %.3f (TAR@FAR0.01 %.3f vs %.3f)", full_rank1, base_rank1,
                a.tar_at_far.at(0.01), b.tar_at_far.at(0.01))};
}

int cli(const std::vector<std::string>& args)
{
    std::ostringstream out;
    std::ostringstream err;
    return facesynth::cli::run(args, out, err);
}

Outcome determinism()
{
    test::TempDir dir("acc_det");
    test::write_face_dataset(dir / "in", 3, 2, 77);
    std::vector<std::vector<std::pair<std::string, std::vector<std::uint8_t>>>> trees;
    for (const std::string workers : {"1", "1", "4"}) {
        const auto out = dir / ("aug" + std::to_string(trees.size()));
        if (cli({"--workers", workers, "augment", "--in", (dir / "in").string(), "--out", out.string()}) != 0) {
            return {false, "augment failed"};
        }
        trees.push_back(test::snapshot_tree(out));
    }
    const bool augment_same = trees[0] == trees[1] && trees[0] == trees[2] && !trees[0].empty();

    pipeline::SyntheticBenchmarkSpec spec;
    spec.identities = 6;
    pipeline::write_synthetic_benchmark(dir / "bench", spec);
    const auto emb = (dir / "e.emb").string();
    if (cli({"embed", "--in", (dir / "bench" / "images").string(), "--out", emb, "--yaws-out",
             (dir / "yaws.csv").string()}) != 0) {
        return {false, "embed failed"};
    }
    std::vector<std::vector<std::uint8_t>> reports;
    for (const std::string workers : {"1", "1", "4"}) {
        const auto report = dir / ("r" + std::to_string(reports.size()) + ".json");
        if (cli({"--workers", workers, "eval", "--protocol", (dir / "bench" / "protocol").string(), "--embeddings",
                 emb, "--yaws", (dir / "yaws.csv").string(), "--report", report.string()}) != 0) {
            return {false, "eval failed"};
        }
        reports.push_back(test::read_bytes(report));
    }
    const bool eval_same = reports[0] == reports[1] && reports[0] == reports[2] && !reports[0].empty();
    return {augment_same && eval_same, std::string("augment outputs ") + (augment_same ? "identical" : "differ") +
                                           ", eval reports " + (eval_same ? "identical" : "differ") +
                                           " across reruns and --workers 1/4"};
}

struct Criterion
{
    const char* name;
    double limit_seconds;
    std::function<Outcome()> run;
};

} // namespace

int main()
{
    const Criterion criteria[] = {
        {"augmentation multiplier", 120.0, multiplier},
        {"softmax fusion suite", 10.0, softmax_suite},
        {"pose recovery", 30.0, pose_recovery},
        {"render round trip", 60.0, render_round_trip},
        {"expression recovery", 30.0, expression_recovery},
        {"metric oracles", 60.0, metric_oracles},
        {"video pooling", std::numeric_limits<double>::infinity(), video_pooling},
        {"end-to-end rank-1 ordering", 300.0, end_to_end},
        {"determinism", std::numeric_limits<double>::infinity(), determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = seconds < c.limit_seconds;
        const bool pass = o.pass && in_time;
        failed += !pass;
        std::printf("%s  %-28s %s; %.1f s%s\n", pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), seconds,
                    in_time ? "" : " (over time limit)");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", int(std::size(criteria)) - failed, std::size(criteria));
    return failed == 0 ? 0 : 1;
}
