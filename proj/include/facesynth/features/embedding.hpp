#pragma once

#include "facesynth/render/image.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace facesynth::features {

struct FeatureVector
{
    std::vector<double> values;
    std::string source_id;
    /// Set when the vector could not be normalised (e.g. a constant image).
    bool degenerate = false;

    std::size_t dimension() const noexcept { return values.size(); }
};

enum class BackendMode { computed, precomputed };

class EmbeddingBackend
{
public:
    virtual ~EmbeddingBackend() = default;
    virtual std::string name() const = 0;
    virtual int dimension() const = 0;
    virtual BackendMode mode() const = 0;
    /// Throws invalid_input for an empty image; precomputed backends ignore the
    /// pixels and throw embedding_not_found for unknown ids.
    virtual FeatureVector embed(const render::RasterImage& image, std::string_view source_id) const = 0;
};

/// Grayscale, area resize to side x side, subtract the mean, scale to unit norm.
class ToyBackend final : public EmbeddingBackend
{
public:
    explicit ToyBackend(int side = 32);
    std::string name() const override { return "toy"; }
    int dimension() const override { return side_ * side_; }
    BackendMode mode() const override { return BackendMode::computed; }
    FeatureVector embed(const render::RasterImage& image, std::string_view source_id) const override;

private:
    int side_;
};

/// id -> vector table, as stored in EMB1 files.
struct EmbeddingTable
{
    int dimension = 0;
    std::map<std::string, std::vector<float>, std::less<>> vectors;

    /// Throws embedding_not_found.
    FeatureVector lookup(std::string_view id) const;
    /// Throws dimension_mismatch when the vector length differs from `dimension`
    /// (an empty table adopts the first length).
    void insert(std::string id, std::vector<float> values);
};

/**
 * EMB1 layout, little endian: "EMB1", u32 D, then records of
 * (u16 id length, id bytes, D float32). Records are written in id order.
 */
EmbeddingTable read_embeddings(const std::string& path);
void write_embeddings(const std::string& path, const EmbeddingTable& table);

class PrecomputedBackend final : public EmbeddingBackend
{
public:
    explicit PrecomputedBackend(EmbeddingTable table);
    std::string name() const override { return "precomputed"; }
    int dimension() const override { return table_.dimension; }
    BackendMode mode() const override { return BackendMode::precomputed; }
    FeatureVector embed(const render::RasterImage& image, std::string_view source_id) const override;
    const EmbeddingTable& table() const noexcept { return table_; }

private:
    EmbeddingTable table_;
};

} // namespace facesynth::features
