#include <doctest.h>

#include <map>
#include <set>

#include "zdc/quantizer_space.hpp"

using namespace zdc;

TEST_CASE("space sizes") {
    CHECK(*QuantizerSpace{8, 2, QuantizerMode::full}.size() == 256);
    CHECK(*QuantizerSpace{2, 1, QuantizerMode::full}.size() == 1);
    CHECK(*QuantizerSpace{3, 2, QuantizerMode::convex_bins}.size() == 4);
    CHECK(*QuantizerSpace{2, 2, QuantizerMode::surjective}.size() == 2);
    CHECK(!QuantizerSpace{241, 2, QuantizerMode::full}.size().has_value());
    CHECK(*QuantizerSpace{241, 4, QuantizerMode::convex_bins}.size() == 2391444);
}

TEST_CASE("full enumeration") {
    const auto all = enumerate_quantizers({8, 2, QuantizerMode::full});
    CHECK(all.size() == 256);
    std::set<std::vector<int>> distinct;
    for (const auto& q : all) distinct.insert(q.map);
    CHECK(distinct.size() == 256);
    // Lexicographic order.
    for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].map < all[i].map);
}

TEST_CASE("single constant map when M = 1") {
    const auto all = enumerate_quantizers({2, 1, QuantizerMode::full});
    REQUIRE(all.size() == 1);
    CHECK(all[0].map == std::vector<int>{0, 0});
}

TEST_CASE("convex-bin enumeration for m=3, M=2") {
    const auto all = enumerate_quantizers({3, 2, QuantizerMode::convex_bins});
    REQUIRE(all.size() == 4);
    CHECK(all[0].map == std::vector<int>{0, 0, 0});
    CHECK(all[1].map == std::vector<int>{0, 0, 1});
    CHECK(all[2].map == std::vector<int>{0, 1, 1});
    CHECK(all[3].map == std::vector<int>{1, 1, 1});
}

TEST_CASE("surjective enumeration filters empty bins") {
    const auto all = enumerate_quantizers({3, 2, QuantizerMode::surjective});
    CHECK(all.size() == 6);
    for (const auto& q : all) {
        std::set<int> hit(q.map.begin(), q.map.end());
        CHECK(hit.size() == 2);
    }
}

TEST_CASE("enumeration budget") {
    CHECK_THROWS_AS(enumerate_quantizers({8, 6, QuantizerMode::full}, 1000), BudgetExceeded);
    CHECK_THROWS_AS(enumerate_quantizers({241, 2, QuantizerMode::full}), BudgetExceeded);
}

TEST_CASE("apply") {
    CHECK(apply(Quantizer::identity(4), 2) == 2);
    CHECK(apply(Quantizer::uninformative(4), 3) == 0);
    CHECK(apply(Quantizer(std::vector<int>{1, 0}), 0) == 1);
    CHECK_THROWS_AS(apply(Quantizer::identity(4), 4), SymbolOutOfRange);
}

TEST_CASE("uniform sampling over the full space") {
    SUBCASE("m=1, M=2 frequencies") {
        Rng rng(9);
        int ones = 0;
        for (int i = 0; i < 10000; ++i)
            ones += sample_uniform({1, 2, QuantizerMode::full}, rng).map[0];
        CHECK(std::abs(ones / 10000.0 - 0.5) < 0.01);
    }
    SUBCASE("m=2, M=2 joint frequencies") {
        Rng rng(10);
        std::map<std::vector<int>, int> counts;
        const int N = 100000;
        for (int i = 0; i < N; ++i) counts[sample_uniform({2, 2, QuantizerMode::full}, rng).map]++;
        REQUIRE(counts.size() == 4);
        for (const auto& [map, c] : counts) CHECK(std::abs(c / double(N) - 0.25) < 0.01);
    }
    SUBCASE("fixed seed reproduces the sequence") {
        Rng a(77), b(77);
        for (int i = 0; i < 100; ++i)
            CHECK(sample_uniform({4, 3, QuantizerMode::full}, a) ==
                  sample_uniform({4, 3, QuantizerMode::full}, b));
    }
    SUBCASE("per-symbol marginal is uniform") {
        Rng rng(11);
        const int N = 100000;
        std::vector<int> counts(3, 0);
        for (int i = 0; i < N; ++i)
            counts[sample_uniform({5, 3, QuantizerMode::full}, rng).map[2]]++;
        const double sigma = std::sqrt((1.0 / 3) * (2.0 / 3) / N);
        for (int c : counts) CHECK(std::abs(c / double(N) - 1.0 / 3) < 3 * sigma + 1e-3);
    }
}

TEST_CASE("uniform sampling over convex bins hits every member uniformly") {
    Rng rng(12);
    const QuantizerSpace space{3, 2, QuantizerMode::convex_bins};
    std::map<std::vector<int>, int> counts;
    const int N = 40000;
    for (int i = 0; i < N; ++i) {
        const auto q = sample_uniform(space, rng);
        // Bins must be contiguous and ordered.
        for (std::size_t x = 1; x < q.map.size(); ++x) CHECK(q.map[x] >= q.map[x - 1]);
        counts[q.map]++;
    }
    CHECK(counts.size() == 4);
    for (const auto& [map, c] : counts) CHECK(std::abs(c / double(N) - 0.25) < 0.02);
}

TEST_CASE("surjective sampling is rejected") {
    Rng rng(13);
    CHECK_THROWS_AS(sample_uniform({3, 2, QuantizerMode::surjective}, rng), ModeMismatch);
}
