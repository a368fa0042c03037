#include "doctest.h"
#include "support.hpp"

#include "facesynth/error.hpp"
#include "facesynth/eval/metrics.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace facesynth;
using namespace facesynth::eval;

namespace {

struct Scores
{
    std::vector<double> genuine;
    std::vector<double> impostor;
};

// Quantised seeds produce many ties across the two classes.
Scores random_scores(std::uint64_t seed, std::size_t n)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    const bool quantise = seed % 2 == 0;
    Scores s;
    for (std::size_t i = 0; i < n; ++i) {
        const bool genuine = i % 5 == 0;
        double v = g(rng) + (genuine ? 1.2 : 0.0);
        if (quantise) {
            v = std::round(v * 20.0) / 20.0;
        }
        (genuine ? s.genuine : s.impostor).push_back(v);
    }
    return s;
}

} // namespace

TEST_CASE("metrics match brute-force oracles")
{
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const auto s = random_scores(seed, 1000);
        const auto curve = roc(s.genuine, s.impostor);
        const auto expect = test::oracle::roc(s.genuine, s.impostor);
        REQUIRE(curve.points.size() == expect.size());
        for (std::size_t k = 0; k < expect.size(); ++k) {
            REQUIRE(curve.points[k].threshold == expect[k].threshold);
            REQUIRE(curve.points[k].far == expect[k].far);
            REQUIRE(curve.points[k].tar == expect[k].tar);
        }
        for (double far : {0.0, 0.001, 0.01, 0.1, 0.5, 1.0}) {
            REQUIRE(tar_at_far(curve, far) == test::oracle::tar_at_far(s.genuine, s.impostor, far));
        }
        REQUIRE(equal_error_rate(s.genuine, s.impostor).eer == test::oracle::eer(s.genuine, s.impostor));

        // 50 probes x 20 gallery templates over 20 subjects.
        std::mt19937_64 rng(seed * 7 + 1);
        std::uniform_int_distribution<int> level(0, 9);
        std::vector<std::string> gallery;
        for (int g = 0; g < 20; ++g) {
            gallery.push_back("s" + std::to_string(g));
        }
        std::vector<std::string> probes;
        Eigen::MatrixXd m(50, 20);
        for (int p = 0; p < 50; ++p) {
            probes.push_back(gallery[std::size_t(p % 20)]);
            for (int g = 0; g < 20; ++g) {
                // Coarse levels force ties.
                m(p, g) = level(rng) / 10.0 + (g == p % 20 ? 0.15 : 0.0);
            }
        }
        const auto result = cmc(m, probes, gallery);
        REQUIRE(result.ranks == test::oracle::cmc_ranks(m, probes, gallery));
    }
}

TEST_CASE("roc edge cases")
{
    const std::vector<double> g{0.9, 0.8, 0.7};
    const std::vector<double> i{0.1, 0.2, 0.3};
    const auto curve = roc(g, i);
    CHECK(tar_at_far(curve, 0.0) == 1.0);
    CHECK(curve.points.back().threshold == std::numeric_limits<double>::infinity());
    CHECK(curve.points.back().far == 0.0);
    CHECK(curve.points.back().tar == 0.0);
    CHECK(curve.points.front().far == 1.0);
    CHECK(equal_error_rate(g, i).eer == 0.0);

    // Identical class distributions: TAR equals FAR everywhere.
    const std::vector<double> same{0.1, 0.4, 0.4, 0.7, 0.9};
    for (const auto& p : roc(same, same).points) {
        CHECK(p.far == p.tar);
    }
    CHECK(equal_error_rate(same, same).eer == doctest::Approx(0.5));
    CHECK_THROWS_AS(roc(std::vector<double>{}, i), Error);
}

TEST_CASE("roc is invariant to monotone score transforms")
{
    const auto s = random_scores(3, 400);
    auto warp = [](std::vector<double> v) {
        for (auto& x : v) {
            x = std::exp(0.7 * x) + 3.0;
        }
        return v;
    };
    const auto a = roc(s.genuine, s.impostor);
    const auto b = roc(warp(s.genuine), warp(s.impostor));
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t k = 0; k < a.points.size(); ++k) {
        CHECK(a.points[k].far == b.points[k].far);
        CHECK(a.points[k].tar == b.points[k].tar);
    }
    CHECK(equal_error_rate(s.genuine, s.impostor).eer ==
          doctest::Approx(equal_error_rate(warp(s.genuine), warp(s.impostor)).eer));
}

TEST_CASE("cmc ranks and rates")
{
    const std::vector<std::string> gallery{"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"};
    const std::vector<std::string> probes{"c"};
    const Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(1, 10, 0.5);
    const std::vector<int> ks{1, 5, 10};
    const auto tied = cmc(flat, probes, gallery, ks);
    CHECK(tied.ranks == std::vector<int>{10});
    CHECK(tied.rates.at(1) == 0.0);
    CHECK(tied.rates.at(10) == 1.0);

    Eigen::MatrixXd m(2, 3);
    m << 0.9, 0.1, 0.5, 0.2, 0.3, 0.4;
    const std::vector<std::string> g3{"x", "y", "x"};
    const std::vector<std::string> p2{"x", "y"};
    const auto r = cmc(m, p2, g3, ks);
    CHECK(r.ranks == std::vector<int>{1, 2});
    CHECK(r.rates.at(1) == 0.5);
    CHECK(r.rates.at(5) == 1.0);

    const std::vector<std::string> stranger{"zz", "y"};
    CHECK_THROWS_AS(cmc(m, stranger, g3), Error);
}

TEST_CASE("fold accuracy")
{
    SUBCASE("separable folds")
    {
        std::vector<LabelledScore> s;
        for (int f = 0; f < 10; ++f) {
            for (int k = 0; k < 6; ++k) {
                s.push_back({0.6 + 0.01 * k, true, f});
                s.push_back({0.1 + 0.01 * k, false, f});
            }
        }
        CHECK(fold_accuracy(s) == 1.0);
        const auto e = eer_and_accuracy(s);
        CHECK(e.eer == 0.0);
        CHECK(e.eer_complement == 1.0);
    }
    SUBCASE("random labels give chance accuracy")
    {
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> u;
        std::vector<LabelledScore> s;
        for (int i = 0; i < 6000; ++i) {
            s.push_back({u(rng), i % 2 == 0, (i / 2) % 10});
        }
        CHECK(std::abs(fold_accuracy(s) - 0.5) < 0.05);
    }
    SUBCASE("errors")
    {
        std::vector<LabelledScore> one{{0.1, true, 0}, {0.2, false, 0}};
        CHECK_THROWS_AS(fold_accuracy(one), Error);
        std::vector<LabelledScore> lopsided{{0.1, true, 0}, {0.2, false, 0}, {0.3, true, 1}};
        CHECK_THROWS_AS(fold_accuracy(lopsided), Error);
    }
}
