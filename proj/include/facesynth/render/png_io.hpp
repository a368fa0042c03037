#pragma once

#include "facesynth/render/image.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace facesynth::render {

/// Reads an 8-bit PNG as gray or RGB. Palette and 16-bit inputs are converted;
/// an alpha channel, if present, is returned through `alpha` (255 = opaque).
RasterImage read_png(const std::string& path, std::vector<std::uint8_t>* alpha = nullptr);

/// Writes an 8-bit gray or RGB PNG; samples are rounded and clamped. With a
/// non-empty `alpha` (one byte per pixel) a gray+alpha or RGBA file is written.
/// Output bytes depend only on the pixels.
void write_png(const std::string& path, const RasterImage& image, std::span<const std::uint8_t> alpha = {});

} // namespace facesynth::render
