#include "facesynth/pipeline/synthetic_benchmark.hpp"

#include "facesynth/error.hpp"
#include "facesynth/render/png_io.hpp"
#include "facesynth/synth/generic_head.hpp"
#include "facesynth/synth/synthetic_faces.hpp"
#include "facesynth/util/hash.hpp"

#include <cstdio>
#include <random>

namespace facesynth::pipeline {

namespace fs = std::filesystem;

namespace {

std::string two_digits(int i)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d", i);
    return buf;
}

} // namespace

eval::Protocol write_synthetic_benchmark(const fs::path& out, const SyntheticBenchmarkSpec& spec)
{
    if (spec.identities < 2 || spec.gallery_stills < 1 || spec.probe_stills + spec.probe_video_frames < 1) {
        throw Error(ErrorCode::invalid_input, "synthetic benchmark needs two identities and non-empty templates");
    }
    const geometry::Mesh material = synth::make_generic_head();
    eval::Protocol protocol;

    for (int i = 0; i < spec.identities; ++i) {
        const std::string subject = "id" + two_digits(i);
        const auto identity = synth::random_identity(util::mix64(spec.seed * 1000003ULL + static_cast<std::uint64_t>(i)));
        const geometry::Mesh mesh = synth::make_generic_head(identity.shape);
        std::mt19937_64 rng(util::mix64(spec.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(i + 1))));
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        fs::create_directories(out / "images" / subject);

        auto shoot = [&](const std::string& name, double yaw) {
            synth::SyntheticCamera cam;
            cam.yaw = yaw;
            cam.pitch = 8.0 * u(rng);
            cam.roll = 6.0 * u(rng);
            cam.width = spec.image_size;
            cam.height = spec.image_size;
            cam.focal = spec.image_size * (2.2 + 0.2 * u(rng));
            cam.offset = Eigen::Vector2d(10.0 * u(rng), 10.0 * u(rng));
            cam.background = Eigen::Vector3d(90.0 + 60.0 * u(rng), 90.0 + 60.0 * u(rng), 90.0 + 60.0 * u(rng));
            auto face = synth::render_synthetic_face(mesh, material, identity.appearance, cam);
            synth::perturb_landmarks(face.landmarks, spec.landmark_noise, rng());
            const fs::path base = out / "images" / subject / name;
            render::write_png(base.string() + ".png", face.image);
            geometry::write_landmarks(base.string() + ".pts", face.landmarks);
            return subject + "/" + name;
        };
        auto side = [&] { return u(rng) < 0.0 ? -1.0 : 1.0; };

        eval::ProtocolTemplate gallery{"g_" + subject, subject, {}};
        for (int k = 0; k < spec.gallery_stills; ++k) {
            const std::string item = shoot("g" + two_digits(k), 12.0 * u(rng));
            gallery.items.push_back({item, features::MediaType::image, item});
        }
        eval::ProtocolTemplate probe{"p_" + subject, subject, {}};
        for (int k = 0; k < spec.probe_stills; ++k) {
            const std::string item = shoot("p" + two_digits(k), side() * (57.5 + 17.5 * u(rng)));
            probe.items.push_back({item, features::MediaType::image, item});
        }
        if (spec.probe_video_frames > 0) {
            const double base = side() * (50.0 + 15.0 * u(rng));
            const std::string media = subject + "/v00";
            for (int k = 0; k < spec.probe_video_frames; ++k) {
                const std::string item = shoot("v00_f" + two_digits(k), base + 4.0 * u(rng));
                probe.items.push_back({media, features::MediaType::video, item});
            }
        }
        for (int k = 0; k < spec.train_images; ++k) {
            protocol.train_items.push_back(shoot("t" + two_digits(k), 75.0 * u(rng)));
        }
        protocol.gallery.push_back(gallery.template_id);
        protocol.probes.push_back(probe.template_id);
        protocol.templates.push_back(std::move(gallery));
        protocol.templates.push_back(std::move(probe));
    }

    const int n = spec.identities;
    for (int i = 0; i < n; ++i) {
        const int fold = i / std::max(1, spec.identities_per_fold);
        const std::string g = "g_id" + two_digits(i);
        protocol.pairs.push_back({g, "p_id" + two_digits(i), true, fold});
        for (int k = 1; k <= spec.impostors_per_identity && k < n; ++k) {
            protocol.pairs.push_back({g, "p_id" + two_digits((i + k) % n), false, fold});
        }
    }
    eval::write_protocol_dir(out / "protocol", protocol);
    return protocol;
}

} // namespace facesynth::pipeline
