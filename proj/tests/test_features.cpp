#include "doctest.h"
#include "support.hpp"

#include "facesynth/error.hpp"
#include "facesynth/features/conditioning.hpp"
#include "facesynth/features/embedding.hpp"
#include "facesynth/matching/fusion.hpp"
#include "facesynth/render/image.hpp"
#include "facesynth/synth/synthetic_faces.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <random>

using namespace facesynth;
using namespace facesynth::features;

namespace {

FeatureVector fv(std::vector<double> v, std::string id = "x")
{
    FeatureVector f;
    f.values = std::move(v);
    f.source_id = std::move(id);
    return f;
}

TaggedFeature tagged(std::vector<double> v, std::string media, MediaType type)
{
    return TaggedFeature{fv(std::move(v), media), std::move(media), type};
}

std::vector<FeatureVector> random_samples(int n, int d, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<FeatureVector> out;
    for (int i = 0; i < n; ++i) {
        std::vector<double> v(std::size_t(d), 0.0);
        for (int k = 0; k < d; ++k) {
            // Anisotropic so that the variances are distinct.
            v[std::size_t(k)] = g(rng) * (d - k) + 0.1 * k;
        }
        out.push_back(fv(std::move(v)));
    }
    return out;
}

Eigen::VectorXd as_eigen(const FeatureVector& f)
{
    return Eigen::Map<const Eigen::VectorXd>(f.values.data(), Eigen::Index(f.values.size()));
}

} // namespace

TEST_CASE("toy backend")
{
    const ToyBackend toy(32);
    CHECK(toy.dimension() == 1024);

    const render::RasterImage flat(64, 64, 3, 90.0f);
    const auto f = toy.embed(flat, "flat");
    CHECK(f.degenerate);
    CHECK(f.dimension() == 1024);

    const auto id = synth::random_identity(3);
    synth::SyntheticCamera cam;
    const auto face = synth::render_synthetic_face(synth::make_generic_head(id.shape), test::generic_head(),
                                                   id.appearance, cam);
    const auto a = toy.embed(face.image, "a");
    CHECK_FALSE(a.degenerate);
    CHECK(a.values == toy.embed(face.image, "a").values);
    double norm = 0.0;
    double mean = 0.0;
    for (double v : a.values) {
        norm += v * v;
        mean += v;
    }
    CHECK(norm == doctest::Approx(1.0));
    CHECK(std::abs(mean) < 1e-9);

    render::RasterImage shifted(face.image.width(), face.image.height(), 3, 0.0f);
    for (int y = 0; y < shifted.height(); ++y) {
        for (int x = 1; x < shifted.width(); ++x) {
            for (int c = 0; c < 3; ++c) {
                shifted.at(x, y, c) = face.image.at(x - 1, y, c);
            }
        }
    }
    CHECK(matching::ncc(a.values, toy.embed(shifted, "b").values) > 0.9);
    CHECK_THROWS_AS(toy.embed(render::RasterImage(), "e"), Error);
}

TEST_CASE("embedding tables")
{
    EmbeddingTable table;
    table.insert("b", {1.0f, 2.0f, 3.0f});
    table.insert("a", {-1.0f, 0.5f, 0.25f});
    CHECK(table.dimension == 3);
    CHECK_THROWS_AS(table.insert("c", {1.0f}), Error);

    test::TempDir dir("emb");
    write_embeddings((dir / "t.emb").string(), table);
    const auto back = read_embeddings((dir / "t.emb").string());
    CHECK(back.dimension == 3);
    CHECK(back.vectors == table.vectors);

    const PrecomputedBackend backend(back);
    CHECK(backend.embed(render::RasterImage(), "b").values == std::vector<double>{1.0, 2.0, 3.0});
    try {
        backend.embed(render::RasterImage(), "missing");
        FAIL("expected embedding_not_found");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::embedding_not_found);
    }

    std::ofstream(dir / "bad.emb", std::ios::binary) << "EMB2";
    CHECK_THROWS_AS(read_embeddings((dir / "bad.emb").string()), Error);
    std::ofstream(dir / "short.emb", std::ios::binary) << std::string("EMB1\x03\x00\x00\x00\x01\x00", 10);
    CHECK_THROWS_AS(read_embeddings((dir / "short.emb").string()), Error);
}

TEST_CASE("video pooling")
{
    SUBCASE("two frames average")
    {
        const std::vector<TaggedFeature> in{tagged({1, 0}, "v", MediaType::video), tagged({0, 1}, "v", MediaType::video)};
        const auto out = video_pool(in);
        REQUIRE(out.size() == 1);
        CHECK(out[0].feature.values == std::vector<double>{0.5, 0.5});
    }
    SUBCASE("videos and images")
    {
        std::vector<TaggedFeature> in{tagged({1, 1}, "v1", MediaType::video), tagged({2, 2}, "img", MediaType::image),
                                      tagged({3, 3}, "v2", MediaType::video), tagged({3, 5}, "v1", MediaType::video),
                                      tagged({1, 1}, "v2", MediaType::video)};
        const auto out = video_pool(in);
        REQUIRE(out.size() == 3);
        CHECK(out[0].media_id == "v1");
        CHECK(out[0].feature.values == std::vector<double>{2, 3});
        CHECK(out[1].type == MediaType::image);
        CHECK(out[2].feature.values == std::vector<double>{2, 2});
        const auto twice = video_pool(out);
        REQUIRE(twice.size() == out.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            CHECK(twice[i].feature.values == out[i].feature.values);
        }
    }
    SUBCASE("single frame is unchanged and images pass through")
    {
        const std::vector<TaggedFeature> in{tagged({0.3, -0.7}, "v", MediaType::video),
                                            tagged({4, 4}, "i1", MediaType::image), tagged({5, 5}, "i2", MediaType::image)};
        const auto out = video_pool(in);
        REQUIRE(out.size() == 3);
        CHECK(out[0].feature.values == in[0].feature.values);
        CHECK(out[2].feature.values == in[2].feature.values);
    }
    SUBCASE("empty and ragged frames")
    {
        std::vector<std::string> warnings;
        const std::vector<TaggedFeature> in{tagged({}, "v", MediaType::video), tagged({1, 2}, "v", MediaType::video)};
        CHECK(video_pool(in, &warnings).size() == 1);
        CHECK(warnings.size() == 1);
        const std::vector<TaggedFeature> ragged{tagged({1, 2}, "v", MediaType::video),
                                                tagged({1, 2, 3}, "v", MediaType::video)};
        CHECK_THROWS_AS(video_pool(ragged), Error);
    }
}

TEST_CASE("PCA on a line recovers its direction")
{
    std::vector<FeatureVector> pts;
    for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
        pts.push_back(fv({x + 3.0, 1.0}));
    }
    const auto model = pca_fit(pts);
    CHECK(model.mean(0) == doctest::Approx(3.0));
    CHECK(std::abs(model.components(0, 0)) == doctest::Approx(1.0));
    CHECK(model.components(1, 0) == doctest::Approx(0.0));
    CHECK(model.variances(1) == doctest::Approx(0.0));
    const auto y = pca_apply(model, fv({5.0, 1.0}));
    CHECK(std::abs(y.values[0]) == doctest::Approx(2.0));
}

TEST_CASE("PCA properties")
{
    const int n = 50;
    const int d = 10;
    const auto samples = random_samples(n, d, 11);
    const auto model = pca_fit(samples);
    REQUIRE(model.dimension() == d);

    const Eigen::MatrixXd& w = model.components;
    CHECK((w.transpose() * w - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-10);
    for (int k = 0; k + 1 < d; ++k) {
        CHECK(model.variances(k) >= model.variances(k + 1));
    }

    Eigen::MatrixXd projected(n, d);
    for (int i = 0; i < n; ++i) {
        const auto y = pca_apply(model, samples[std::size_t(i)]);
        projected.row(i) = as_eigen(y).transpose();
        // Full rank: exact reconstruction and norm preservation.
        const Eigen::VectorXd back = w * as_eigen(y) + model.mean;
        CHECK((back - as_eigen(samples[std::size_t(i)])).norm() < 1e-8);
        CHECK(as_eigen(y).norm() == doctest::Approx((as_eigen(samples[std::size_t(i)]) - model.mean).norm()));
    }
    CHECK(projected.colwise().mean().cwiseAbs().maxCoeff() < 1e-9);
    const Eigen::MatrixXd cov = projected.transpose() * projected / double(n - 1);
    for (int a = 0; a < d; ++a) {
        CHECK(cov(a, a) == doctest::Approx(model.variances(a)).epsilon(1e-9));
        for (int b = 0; b < d; ++b) {
            if (a != b) {
                CHECK(std::abs(cov(a, b)) < 1e-8);
            }
        }
    }
}

TEST_CASE("PCA errors and serialisation")
{
    try {
        pca_fit(std::vector<FeatureVector>{fv({1, 2}), fv({1, 2}), fv({1, 2})});
        FAIL("expected zero_variance");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::zero_variance);
    }
    CHECK_THROWS_AS(pca_fit(std::vector<FeatureVector>{fv({1, 2})}), Error);
    CHECK_THROWS_AS(pca_fit(std::vector<FeatureVector>{fv({1, 2}), fv({1, 2, 3})}), Error);

    const auto model = pca_fit(random_samples(20, 6, 4));
    CHECK_THROWS_AS(pca_apply(model, fv({1, 2})), Error);
    test::TempDir dir("pca");
    write_pca((dir / "m.pca").string(), model);
    const auto back = read_pca((dir / "m.pca").string());
    CHECK(back.mean == model.mean);
    CHECK(back.components == model.components);
    CHECK(back.variances == model.variances);
    CHECK(pca_hash(back) == pca_hash(model));
    auto other = model;
    other.mean(0) += 1e-12;
    CHECK(pca_hash(other) != pca_hash(model));
    // Same input, same model.
    CHECK(pca_hash(pca_fit(random_samples(20, 6, 4))) == pca_hash(model));
}

TEST_CASE("root normalisation")
{
    const auto y = root_normalize(fv({4.0, -4.0, 0.0}), 0.5);
    CHECK(y.values[0] == doctest::Approx(2.0));
    CHECK(y.values[1] == doctest::Approx(-2.0));
    CHECK(y.values[2] == 0.0);

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 200; ++i) {
        const double x = u(rng);
        const double c = 0.05 + 0.95 * std::abs(u(rng)) / 5.0;
        CHECK(root_normalize(fv({-x}), c).values[0] == -root_normalize(fv({x}), c).values[0]);
        CHECK(root_normalize(fv({x}), 1.0).values[0] == x);
        // Magnitudes move toward 1.
        const double r = root_normalize(fv({x}), c).values[0];
        CHECK(std::abs(std::log(std::abs(r))) <= std::abs(std::log(std::abs(x))) + 1e-12);
    }
    CHECK_THROWS_AS(root_normalize(fv({1.0}), 0.0), Error);
    CHECK_THROWS_AS(root_normalize(fv({1.0}), 1.5), Error);

    const auto model = pca_fit(random_samples(15, 4, 2));
    const auto x = random_samples(1, 4, 99)[0];
    CHECK(condition(model, x).values == root_normalize(pca_apply(model, x)).values);
}
