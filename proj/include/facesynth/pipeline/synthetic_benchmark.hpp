#pragma once

#include "facesynth/eval/protocol.hpp"

#include <cstdint>
#include <filesystem>

namespace facesynth::pipeline {

struct SyntheticBenchmarkSpec
{
    int identities = 20;
    std::uint64_t seed = 2016;
    int gallery_stills = 2;
    int probe_stills = 2;
    int probe_video_frames = 4;
    int train_images = 3;
    double landmark_noise = 0.5;
    int image_size = 256;
    /// Identities per verification fold.
    int identities_per_fold = 2;
    /// Impostor pairs per identity (against the following identities).
    int impostors_per_identity = 3;
};

/**
 * Writes a synthetic face benchmark: textured procedural heads (one random
 * shape and texture per identity) rendered across yaw 0-75 degrees, as
 *   <out>/images/<subject>/<item>.png + .pts
 *   <out>/protocol/{templates,pairs,gallery,probes,train}.csv
 * Gallery templates hold near-frontal stills; probe templates hold stills at
 * 40-75 degrees plus one video. Training images are never used by a template.
 * The output depends only on these parameters.
 */
eval::Protocol write_synthetic_benchmark(const std::filesystem::path& out, const SyntheticBenchmarkSpec& spec = {});

} // namespace facesynth::pipeline
