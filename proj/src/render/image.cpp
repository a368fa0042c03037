#include "facesynth/render/image.hpp"

#include "facesynth/error.hpp"

#include <algorithm>
#include <cmath>

namespace facesynth::render {

RasterImage::RasterImage(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels)
{
    if (width <= 0 || height <= 0 || (channels != 1 && channels != 3)) {
        throw Error(ErrorCode::invalid_input, "image must be non-empty with 1 or 3 channels");
    }
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

void RasterImage::validate() const
{
    if (channels_ != 1 && channels_ != 3) {
        throw Error(ErrorCode::invalid_input, "image must have 1 or 3 channels");
    }
    if (data_.size() != static_cast<std::size_t>(width_) * height_ * channels_) {
        throw Error(ErrorCode::invalid_input, "image data length mismatch");
    }
    for (float v : data_) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::invalid_input, "non-finite image sample");
        }
    }
}

void sample_bilinear(const RasterImage& image, double x, double y, float* out)
{
    const int w = image.width();
    const int h = image.height();
    x = std::clamp(x, 0.0, static_cast<double>(w - 1));
    y = std::clamp(y, 0.0, static_cast<double>(h - 1));
    const int x0 = std::min(static_cast<int>(x), w - 1);
    const int y0 = std::min(static_cast<int>(y), h - 1);
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const float* p00 = image.pixel(x0, y0);
    const float* p10 = image.pixel(x1, y0);
    const float* p01 = image.pixel(x0, y1);
    const float* p11 = image.pixel(x1, y1);
    for (int c = 0; c < image.channels(); ++c) {
        const double top = p00[c] + fx * (p10[c] - p00[c]);
        const double bottom = p01[c] + fx * (p11[c] - p01[c]);
        out[c] = static_cast<float>(top + fy * (bottom - top));
    }
}

RasterImage to_gray(const RasterImage& image)
{
    if (image.channels() == 1) {
        return image;
    }
    RasterImage gray(image.width(), image.height(), 1);
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            const float* p = image.pixel(x, y);
            gray.at(x, y, 0) = 0.299f * p[0] + 0.587f * p[1] + 0.114f * p[2];
        }
    }
    return gray;
}

namespace {

/// Overlap weights of destination cells with source cells along one axis.
std::vector<std::vector<std::pair<int, double>>> box_weights(int src, int dst)
{
    std::vector<std::vector<std::pair<int, double>>> weights(dst);
    const double ratio = static_cast<double>(src) / dst;
    for (int i = 0; i < dst; ++i) {
        const double lo = i * ratio;
        const double hi = (i + 1) * ratio;
        for (int s = static_cast<int>(std::floor(lo)); s < std::min(src, static_cast<int>(std::ceil(hi))); ++s) {
            const double overlap = std::min(hi, s + 1.0) - std::max(lo, static_cast<double>(s));
            if (overlap > 0.0) {
                weights[i].emplace_back(s, overlap / ratio);
            }
        }
    }
    return weights;
}

} // namespace

RasterImage resize_area(const RasterImage& image, int width, int height)
{
    const auto wx = box_weights(image.width(), width);
    const auto wy = box_weights(image.height(), height);
    const int channels = image.channels();
    RasterImage out(width, height, channels);
    std::vector<double> acc(channels);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (const auto& [sy, fy] : wy[y]) {
                for (const auto& [sx, fx] : wx[x]) {
                    const float* p = image.pixel(sx, sy);
                    for (int c = 0; c < channels; ++c) {
                        acc[c] += fy * fx * p[c];
                    }
                }
            }
            for (int c = 0; c < channels; ++c) {
                out.at(x, y, c) = static_cast<float>(acc[c]);
            }
        }
    }
    return out;
}

RasterImage warp_similarity(const RasterImage& source, const geometry::Similarity2D& transform, int width, int height)
{
    const auto inverse = transform.inverse();
    RasterImage out(width, height, source.channels());
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const Eigen::Vector2d p = inverse.apply(Eigen::Vector2d(x, y));
            // Half a pixel of slack keeps the outermost samples instead of
            // losing them to rounding.
            if (p.x() < -0.5 || p.y() < -0.5 || p.x() > source.width() - 0.5 || p.y() > source.height() - 0.5) {
                continue;
            }
            sample_bilinear(source, p.x(), p.y(), out.pixel(x, y));
        }
    }
    return out;
}

void quantize(RasterImage& image)
{
    for (float& v : image.data()) {
        v = std::clamp(std::round(v), 0.0f, 255.0f);
    }
}

double mean_absolute_error(const RasterImage& a, const RasterImage& b, std::span<const std::uint8_t> mask)
{
    if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels()) {
        throw Error(ErrorCode::dimension_mismatch, "images differ in shape");
    }
    if (!mask.empty() && mask.size() != a.pixel_count()) {
        throw Error(ErrorCode::dimension_mismatch, "mask size mismatch");
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) {
            if (!mask.empty() && mask[static_cast<std::size_t>(y) * a.width() + x] == 0) {
                continue;
            }
            const float* pa = a.pixel(x, y);
            const float* pb = b.pixel(x, y);
            for (int c = 0; c < a.channels(); ++c) {
                sum += std::abs(pa[c] - pb[c]);
            }
            count += a.channels();
        }
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

} // namespace facesynth::render
