#include "doctest.h"
#include "support.hpp"

#include "facesynth/error.hpp"
#include "facesynth/matching/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

using namespace facesynth;
using namespace facesynth::matching;

namespace {

features::FeatureVector fv(std::vector<double> v)
{
    features::FeatureVector f;
    f.values = std::move(v);
    return f;
}

std::vector<double> random_scores(std::mt19937_64& rng, std::size_t n)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> s(n);
    for (auto& x : s) {
        x = u(rng);
    }
    return s;
}

double mean_of(const std::vector<double>& s)
{
    return std::accumulate(s.begin(), s.end(), 0.0) / double(s.size());
}

std::vector<double> random_vector(std::mt19937_64& rng, int d)
{
    std::normal_distribution<double> g;
    std::vector<double> v(std::size_t(d), 0.0);
    for (auto& x : v) {
        x = g(rng);
    }
    return v;
}

ItemFeatures item(std::string id, double yaw, std::mt19937_64& rng, bool rendered = true)
{
    ItemFeatures it;
    it.item_id = std::move(id);
    it.yaw = yaw;
    it.in_plane = fv(random_vector(rng, 8));
    if (rendered) {
        for (int v : {-75, -40, 0, 40, 75}) {
            it.rendered.emplace(v, fv(random_vector(rng, 8)));
        }
    }
    return it;
}

} // namespace

TEST_CASE("normalised cross correlation")
{
    const std::vector<double> x{1, 2, 3, 4};
    CHECK(ncc(x, x) == doctest::Approx(1.0));
    CHECK(ncc(x, std::vector<double>{4, 3, 2, 1}) == doctest::Approx(-1.0));
    CHECK(ncc(x, std::vector<double>{11, 21, 31, 41}) == doctest::Approx(1.0));
    CHECK(ncc(x, std::vector<double>{-3, 0, -6, 1}) == doctest::Approx(ncc(std::vector<double>{-3, 0, -6, 1}, x)));
    bool degenerate = false;
    CHECK(ncc(x, std::vector<double>{5, 5, 5, 5}, &degenerate) == 0.0);
    CHECK(degenerate);
    CHECK_THROWS_AS(ncc(x, std::vector<double>{1, 2}), Error);

    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
        const auto a = random_vector(rng, 20);
        const auto b = random_vector(rng, 20);
        const double s = ncc(a, b);
        CHECK(s >= -1.0);
        CHECK(s <= 1.0);
    }
}

TEST_CASE("softmax pooling values")
{
    const std::vector<double> two{0.2, 0.8};
    CHECK(softmax_pool(two, 5.0) == doctest::Approx(0.7715444760934599).epsilon(1e-14));
    CHECK(fuse_scores(two) == doctest::Approx(0.7594921143830966).epsilon(1e-14));
    CHECK(fuse_scores(std::vector<double>{0.1, 0.4, 0.9}) == doctest::Approx(0.8369360446739186).epsilon(1e-14));
    CHECK(softmax_pool(two, 0.0) == doctest::Approx(0.5).epsilon(1e-15));

    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const auto s = random_scores(rng, 1 + trial % 12);
        for (int beta : {0, 1, 7, 20}) {
            CHECK(std::abs(softmax_pool(s, beta) - double(test::oracle::softmax(s, beta))) < 1e-12);
        }
        CHECK(std::abs(fuse_scores(s) - double(test::oracle::fused(s))) < 1e-12);
        CHECK(std::abs(fuse_scores(s, 2, 9) - double(test::oracle::fused(s, 2, 9))) < 1e-12);
    }

    // Large betas stay finite.
    CHECK(softmax_pool(std::vector<double>{1000.0, 999.0}, 500.0) == doctest::Approx(1000.0));
    CHECK_THROWS_AS(softmax_pool(std::vector<double>{}, 1.0), Error);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(softmax_pool(std::vector<double>{0.1, nan}, 1.0), Error);
}

TEST_CASE("softmax pooling limits and ordering")
{
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto s = random_scores(rng, 2 + trial % 30);
        const double lo = *std::min_element(s.begin(), s.end());
        const double hi = *std::max_element(s.begin(), s.end());
        const double mean = mean_of(s);
        REQUIRE(std::abs(softmax_pool(s, 0.0) - mean) <= 1e-12);
        double prev = -std::numeric_limits<double>::infinity();
        for (int beta = 0; beta <= 40; ++beta) {
            const double v = softmax_pool(s, beta);
            REQUIRE(v >= lo - 1e-12);
            REQUIRE(v <= hi + 1e-12);
            REQUIRE(v >= prev - 1e-12);
            prev = v;
        }
        auto sorted = s;
        std::sort(sorted.rbegin(), sorted.rend());
        if (sorted[0] - sorted[1] >= 0.05) {
            REQUIRE(std::abs(softmax_pool(s, 200.0) - hi) <= 1e-4);
        }
        REQUIRE(fuse_scores(s) > mean);
    }
    const std::vector<double> flat(7, 0.42);
    CHECK(fuse_scores(flat) == doctest::Approx(0.42).epsilon(1e-15));
    CHECK(softmax_pool(flat, 13.0) == doctest::Approx(0.42).epsilon(1e-15));
}

TEST_CASE("baseline pooling")
{
    const std::vector<double> s{0.3, -0.2, 0.9, 0.1};
    CHECK(baseline_pool(s, Strategy::min) == -0.2);
    CHECK(baseline_pool(s, Strategy::max) == 0.9);
    CHECK(baseline_pool(s, Strategy::mean) == doctest::Approx(0.275));
    CHECK_THROWS_AS(baseline_pool(s, Strategy::softmax), Error);
    CHECK_THROWS_AS(baseline_pool(std::vector<double>{}, Strategy::mean), Error);

    FusionConfig config;
    CHECK(pool(s, config) == doctest::Approx(fuse_scores(s)));
    config.strategy = Strategy::max;
    CHECK(pool(s, config) == 0.9);
    config.beta_min = 5;
    config.beta_max = 2;
    CHECK_THROWS_AS(config.validate(), Error);
    config.beta_min = -1;
    config.beta_max = 4;
    CHECK_THROWS_AS(config.validate(), Error);

    CHECK(parse_strategy("softmax") == Strategy::softmax);
    CHECK(std::string(to_string(Strategy::mean)) == "mean");
    CHECK_THROWS_AS(parse_strategy("median"), Error);
}

TEST_CASE("mutual view selection")
{
    CHECK(select_mutual_view(5, -10) == 0);
    CHECK(select_mutual_view(80, 65) == 75);
    CHECK(select_mutual_view(5, 65) == 40);
    CHECK(select_mutual_view(30, 30) == 0);
    CHECK(select_mutual_view(60, -60) == 75);
    CHECK(select_mutual_view(45, 50) == 40);
    CHECK(mutual_view_key(-5, -65) == -40);
    CHECK(mutual_view_key(-70, -80) == -75);
    CHECK(mutual_view_key(-10, 10) == 0);
    CHECK(mutual_view_key(-40, 40) == 40);
    for (double a = -90; a <= 90; a += 7.5) {
        for (double b = -90; b <= 90; b += 7.5) {
            REQUIRE(select_mutual_view(a, b) == select_mutual_view(b, a));
            REQUIRE(mutual_view_key(a, b) == mutual_view_key(b, a));
        }
    }
}

TEST_CASE("template similarity")
{
    std::mt19937_64 rng(31);
    TemplateFeatures p{"p", "a", {item("p1", 10, rng), item("p2", -50, rng), item("p3", 70, rng)}};
    TemplateFeatures q{"q", "b", {item("q1", 0, rng), item("q2", 65, rng)}};

    SUBCASE("composition of in-plane and rendered fusion")
    {
        const auto r = template_similarity(p, q);
        REQUIRE(r.in_plane.has_value());
        REQUIRE(r.rendered.has_value());
        CHECK_FALSE(r.single_variant);

        std::vector<double> in_plane;
        std::vector<double> rendered;
        for (const auto& a : p.items) {
            for (const auto& b : q.items) {
                in_plane.push_back(ncc(a.in_plane->values, b.in_plane->values));
                const int key = mutual_view_key(a.yaw, b.yaw);
                rendered.push_back(ncc(a.rendered.at(key).values, b.rendered.at(key).values));
            }
        }
        const double expect = 0.5 * double(test::oracle::fused(in_plane) + test::oracle::fused(rendered));
        CHECK(std::abs(r.score - expect) < 1e-12);
        CHECK(in_plane_scores(p, q).rows() == 3);
        CHECK(in_plane_scores(p, q).cols() == 2);
    }
    SUBCASE("symmetry")
    {
        CHECK(template_similarity(p, q).score == doctest::Approx(template_similarity(q, p).score).epsilon(1e-14));
        TemplateMatchConfig mean;
        mean.fusion.strategy = Strategy::mean;
        CHECK(template_similarity(p, q, mean).score ==
              doctest::Approx(template_similarity(q, p, mean).score).epsilon(1e-14));
    }
    SUBCASE("one kind of feature")
    {
        TemplateMatchConfig config;
        config.use_rendered = false;
        const auto r = template_similarity(p, q, config);
        CHECK(r.single_variant);
        CHECK_FALSE(r.rendered.has_value());
        CHECK(r.score == *r.in_plane);

        for (auto& it : q.items) {
            it.rendered.clear();
        }
        const auto d = template_similarity(p, q);
        CHECK(d.single_variant);
        CHECK(d.score == *d.in_plane);

        config.use_in_plane = false;
        CHECK_THROWS_AS(template_similarity(p, q, config), Error);
    }
    SUBCASE("duplicating a feature raises softmax but leaves max unchanged")
    {
        TemplateMatchConfig config;
        config.use_rendered = false;
        const auto base = template_similarity(p, q, config).score;
        const auto m = in_plane_scores(p, q);
        Eigen::Index r0 = 0;
        Eigen::Index c0 = 0;
        m.maxCoeff(&r0, &c0);
        auto p2 = p;
        p2.items.push_back(p.items[std::size_t(r0)]);
        CHECK(template_similarity(p2, q, config).score > base);
        config.fusion.strategy = Strategy::max;
        CHECK(template_similarity(p2, q, config).score == template_similarity(p, q, config).score);
    }
    SUBCASE("degenerate features are flagged")
    {
        p.items[0].in_plane = fv(std::vector<double>(8, 1.0));
        CHECK(template_similarity(p, q).degenerate);
    }
}

TEST_CASE("score matrix csv")
{
    Eigen::MatrixXd m(2, 2);
    m << 0.5, -0.25, 1.0, 0.125;
    const std::vector<std::string> rows{"p1", "p,2"};
    const std::vector<std::string> cols{"g1", "g2"};
    CHECK(score_matrix_csv(m, rows, cols) == "id,g1,g2\np1,0.5,-0.25\n\"p,2\",1,0.125\n");
    CHECK_THROWS_AS(score_matrix_csv(m, std::vector<std::string>{"a"}, cols), Error);
}
