#pragma once

#include "facesynth/geometry/similarity.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace facesynth::render {

/**
 * Row-major image with 1 or 3 interleaved channels. Samples are floats on the
 * 8-bit scale [0, 255] so images read from 8-bit files round-trip exactly.
 */
class RasterImage
{
public:
    RasterImage() = default;
    RasterImage(int width, int height, int channels, float fill = 0.0f);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }

    float& at(int x, int y, int c) { return data_[index(x, y, c)]; }
    float at(int x, int y, int c) const { return data_[index(x, y, c)]; }
    float* pixel(int x, int y) { return data_.data() + index(x, y, 0); }
    const float* pixel(int x, int y) const { return data_.data() + index(x, y, 0); }

    std::span<float> data() noexcept { return data_; }
    std::span<const float> data() const noexcept { return data_; }

    bool inside(double x, double y) const noexcept
    {
        return x >= 0.0 && y >= 0.0 && x <= width_ - 1 && y <= height_ - 1;
    }

    /// Throws invalid_input on a bad channel count or non-finite samples.
    void validate() const;

    friend bool operator==(const RasterImage&, const RasterImage&) = default;

private:
    std::size_t index(int x, int y, int c) const noexcept
    {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<float> data_;
};

/// Bilinear sample at pixel coordinates (centres on integers), edge clamped.
/// Writes image.channels() values to `out`.
void sample_bilinear(const RasterImage& image, double x, double y, float* out);

RasterImage to_gray(const RasterImage& image);

/// Box-filter resize; exact area averaging for both up- and down-sampling.
RasterImage resize_area(const RasterImage& image, int width, int height);

/// out(p) = source(T^-1 p) with bilinear sampling; black outside the source.
RasterImage warp_similarity(const RasterImage& source, const geometry::Similarity2D& transform, int width, int height);

/// Rounds and clamps every sample to an integer in [0, 255].
void quantize(RasterImage& image);

/// Mean absolute difference over all channels of the pixels where mask != 0
/// (every pixel when the mask is empty), on the 0-255 scale.
double mean_absolute_error(const RasterImage& a, const RasterImage& b, std::span<const std::uint8_t> mask = {});

} // namespace facesynth::render
