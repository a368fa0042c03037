#include "facesynth/render/png_io.hpp"

#include "facesynth/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

namespace facesynth::render {

namespace {

struct FileCloser
{
    void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

} // namespace

RasterImage read_png(const std::string& path, std::vector<std::uint8_t>* alpha)
{
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) {
        throw Error(ErrorCode::io_error, "cannot open " + path);
    }
    png_byte signature[8];
    if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
        throw Error(ErrorCode::io_error, path + " is not a PNG file");
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorCode::io_error, "libpng initialisation failed");
    }
    std::vector<png_byte> buffer;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorCode::io_error, "corrupt PNG " + path);
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_byte color_type = png_get_color_type(png, info);
    const png_byte bit_depth = png_get_bit_depth(png, info);
    if (bit_depth == 16) {
        png_set_strip_16(png);
    }
    if (color_type == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(png);
    }
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (png_get_valid(png, info, PNG_INFO_tRNS)) {
        png_set_tRNS_to_alpha(png);
    }
    png_read_update_info(png, info);

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    const int file_channels = png_get_channels(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    buffer.resize(stride * height);
    rows.resize(height);
    for (int y = 0; y < height; ++y) {
        rows[y] = buffer.data() + stride * y;
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const bool has_alpha = file_channels == 2 || file_channels == 4;
    const int channels = file_channels >= 3 ? 3 : 1;
    RasterImage image(width, height, channels);
    if (alpha) {
        alpha->assign(static_cast<std::size_t>(width) * height, 255);
    }
    for (int y = 0; y < height; ++y) {
        const png_byte* row = rows[y];
        for (int x = 0; x < width; ++x) {
            const png_byte* p = row + static_cast<std::size_t>(x) * file_channels;
            for (int c = 0; c < channels; ++c) {
                image.at(x, y, c) = p[c];
            }
            if (alpha && has_alpha) {
                (*alpha)[static_cast<std::size_t>(y) * width + x] = p[file_channels - 1];
            }
        }
    }
    return image;
}

void write_png(const std::string& path, const RasterImage& image, std::span<const std::uint8_t> alpha)
{
    if (image.empty()) {
        throw Error(ErrorCode::invalid_input, "cannot write an empty image");
    }
    if (!alpha.empty() && alpha.size() != image.pixel_count()) {
        throw Error(ErrorCode::dimension_mismatch, "alpha size mismatch");
    }
    const int channels = image.channels() + (alpha.empty() ? 0 : 1);
    int color_type = PNG_COLOR_TYPE_GRAY;
    if (image.channels() == 3) {
        color_type = alpha.empty() ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_RGB_ALPHA;
    } else if (!alpha.empty()) {
        color_type = PNG_COLOR_TYPE_GRAY_ALPHA;
    }

    std::vector<png_byte> buffer(static_cast<std::size_t>(image.width()) * image.height() * channels);
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            png_byte* out = buffer.data() + (static_cast<std::size_t>(y) * image.width() + x) * channels;
            const float* p = image.pixel(x, y);
            for (int c = 0; c < image.channels(); ++c) {
                out[c] = static_cast<png_byte>(std::clamp(std::lround(p[c]), 0L, 255L));
            }
            if (!alpha.empty()) {
                out[channels - 1] = alpha[static_cast<std::size_t>(y) * image.width() + x];
            }
        }
    }

    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) {
        throw Error(ErrorCode::io_error, "cannot write " + path);
    }
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorCode::io_error, "libpng initialisation failed");
    }
    std::vector<png_bytep> rows(image.height());
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorCode::io_error, "failed writing " + path);
    }
    png_init_io(png, file.get());
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, image.width(), image.height(), 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < image.height(); ++y) {
        rows[y] = buffer.data() + static_cast<std::size_t>(y) * image.width() * channels;
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace facesynth::render
