#include "facesynth/features/embedding.hpp"

#include "facesynth/error.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace facesynth::features {

static_assert(std::endian::native == std::endian::little, "EMB1 I/O assumes a little-endian host");

namespace {

template <typename T>
void put(std::ostream& out, T v)
{
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in, const std::string& path)
{
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
        throw Error(ErrorCode::invalid_input, "truncated embedding file " + path);
    }
    return v;
}

} // namespace

ToyBackend::ToyBackend(int side) : side_(side)
{
    if (side <= 0) {
        throw Error(ErrorCode::invalid_input, "toy embedding side must be positive");
    }
}

FeatureVector ToyBackend::embed(const render::RasterImage& image, std::string_view source_id) const
{
    if (image.width() <= 0 || image.height() <= 0) {
        throw Error(ErrorCode::invalid_input, "cannot embed an empty image");
    }
    const auto small = render::resize_area(render::to_gray(image), side_, side_);
    FeatureVector f;
    f.source_id = std::string(source_id);
    f.values.assign(small.data().begin(), small.data().end());
    double mean = 0.0;
    for (double v : f.values) {
        mean += v;
    }
    mean /= static_cast<double>(f.values.size());
    double norm = 0.0;
    for (double& v : f.values) {
        v -= mean;
        norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm < 1e-9) {
        std::fill(f.values.begin(), f.values.end(), 0.0);
        f.degenerate = true;
        return f;
    }
    for (double& v : f.values) {
        v /= norm;
    }
    return f;
}

FeatureVector EmbeddingTable::lookup(std::string_view id) const
{
    const auto it = vectors.find(id);
    if (it == vectors.end()) {
        throw Error(ErrorCode::embedding_not_found, "no embedding for '" + std::string(id) + "'");
    }
    FeatureVector f;
    f.source_id = it->first;
    f.values.assign(it->second.begin(), it->second.end());
    return f;
}

void EmbeddingTable::insert(std::string id, std::vector<float> values)
{
    if (vectors.empty() && dimension == 0) {
        dimension = static_cast<int>(values.size());
    }
    if (static_cast<int>(values.size()) != dimension) {
        throw Error(ErrorCode::dimension_mismatch, "embedding '" + id + "' has " + std::to_string(values.size()) +
                                                       " values, expected " + std::to_string(dimension));
    }
    if (id.size() > 0xFFFF) {
        throw Error(ErrorCode::invalid_input, "embedding id longer than 65535 bytes");
    }
    vectors[std::move(id)] = std::move(values);
}

EmbeddingTable read_embeddings(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::io_error, "cannot open " + path);
    }
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "EMB1", 4) != 0) {
        throw Error(ErrorCode::invalid_input, path + " is not an EMB1 file");
    }
    EmbeddingTable table;
    table.dimension = static_cast<int>(get<std::uint32_t>(in, path));
    while (in.peek() != std::char_traits<char>::eof()) {
        const auto len = get<std::uint16_t>(in, path);
        std::string id(len, '\0');
        if (!in.read(id.data(), len)) {
            throw Error(ErrorCode::invalid_input, "truncated embedding file " + path);
        }
        std::vector<float> values(static_cast<std::size_t>(table.dimension));
        if (!in.read(reinterpret_cast<char*>(values.data()),
                     static_cast<std::streamsize>(values.size() * sizeof(float)))) {
            throw Error(ErrorCode::invalid_input, "truncated embedding file " + path);
        }
        for (float v : values) {
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::invalid_input, "non-finite value in embedding '" + id + "'");
            }
        }
        table.vectors[std::move(id)] = std::move(values);
    }
    return table;
}

void write_embeddings(const std::string& path, const EmbeddingTable& table)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::io_error, "cannot write " + path);
    }
    out.write("EMB1", 4);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(table.dimension));
    for (const auto& [id, values] : table.vectors) {
        put<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
        out.write(id.data(), static_cast<std::streamsize>(id.size()));
        out.write(reinterpret_cast<const char*>(values.data()),
                  static_cast<std::streamsize>(values.size() * sizeof(float)));
    }
    if (!out) {
        throw Error(ErrorCode::io_error, "failed writing " + path);
    }
}

PrecomputedBackend::PrecomputedBackend(EmbeddingTable table) : table_(std::move(table)) {}

FeatureVector PrecomputedBackend::embed(const render::RasterImage&, std::string_view source_id) const
{
    return table_.lookup(source_id);
}

} // namespace facesynth::features
