#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "zdc/baselines.hpp"

using namespace zdc;

namespace {

// Fine discretization of N(0,1) on [-6, 6] as weighted points.
void standard_normal_points(std::vector<double>& values, std::vector<double>& weights) {
    const int N = 2401;
    const double step = 12.0 / (N - 1);
    values.resize(N);
    weights.resize(N);
    double total = 0.0;
    for (int i = 0; i < N; ++i) {
        const double z = -6.0 + i * step;
        values[i] = z;
        total += (weights[i] = std::exp(-0.5 * z * z));
    }
    for (double& w : weights) w /= total;
}

} // namespace

TEST_CASE("scalar quantizer encode/decode") {
    ScalarQuantizer sq;
    sq.codebook = {-1.0, 0.0, 2.0};
    sq.rebuild_thresholds();
    CHECK(sq.thresholds == std::vector<double>{-0.5, 1.0});
    CHECK(sq.encode(-3.0) == 0);
    CHECK(sq.encode(-0.2) == 1);
    CHECK(sq.encode(0.99) == 1);
    CHECK(sq.encode(5.0) == 2);
    CHECK(sq.quantize_value(1.5) == 2.0);
}

TEST_CASE("one level collapses to the mean") {
    const auto sq = lloyd_max_weighted({1.0, 2.0, 3.0}, {0.25, 0.5, 0.25}, 1);
    REQUIRE(sq.levels() == 1);
    CHECK(sq.codebook[0] == doctest::Approx(2.0));
    CHECK(sq.thresholds.empty());
}

TEST_CASE("two levels on a standard normal match the known optimum") {
    std::vector<double> values, weights;
    standard_normal_points(values, weights);
    const auto sq = lloyd_max_weighted(values, weights, 2);
    REQUIRE(sq.levels() == 2);
    const double want = std::sqrt(2.0 / 3.141592653589793); // 0.7979...
    CHECK(sq.codebook[0] == doctest::Approx(-want).epsilon(2e-3));
    CHECK(sq.codebook[1] == doctest::Approx(want).epsilon(2e-3));
    CHECK(std::abs(sq.thresholds[0]) < 5e-3);
}

TEST_CASE("distortion trace descends monotonically") {
    std::vector<double> values, weights;
    standard_normal_points(values, weights);
    std::vector<double> trace;
    lloyd_max_weighted(values, weights, 4, std::nullopt, &trace);
    REQUIRE(trace.size() >= 2);
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-15);
}

TEST_CASE("thresholds are codebook midpoints after design") {
    std::vector<double> values, weights;
    standard_normal_points(values, weights);
    const auto sq = lloyd_max_weighted(values, weights, 4);
    for (std::size_t i = 0; i + 1 < sq.levels(); ++i)
        CHECK(sq.thresholds[i] == doctest::Approx(0.5 * (sq.codebook[i] + sq.codebook[i + 1])));
}

TEST_CASE("snapping restricts levels to the reproduction alphabet") {
    const std::vector<double> alphabet{1, 2, 3, 4, 5, 6, 7, 8};
    const auto source = zdc_test::benchmark_source();
    const auto path = sample_path(source, 100000, 3);
    std::vector<double> samples(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) samples[i] = source.value(path[i]);
    const auto sq = lloyd_max(samples, 2, alphabet);
    for (double c : sq.codebook) {
        bool member = false;
        for (double a : alphabet) member = member || (c == a);
        CHECK(member);
    }
}

TEST_CASE("insufficient distinct support is rejected") {
    CHECK_THROWS_AS(lloyd_max_weighted({1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}, 2), InsufficientSupport);
    CHECK_THROWS_AS(lloyd_max(std::vector<double>{2.5}, 2), InsufficientSupport);
}

TEST_CASE("sample-based and distribution-based designs agree in the limit") {
    // Large i.i.d. sample from a 4-point law vs. the exact weighted design.
    const std::vector<double> support{1, 2, 3, 4};
    const ProbabilityVector law({0.4, 0.3, 0.2, 0.1});
    const auto source = zdc_test::iid_source(law.p, support);
    const auto path = sample_path(source, 400000, 9);
    std::vector<double> samples(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) samples[i] = source.value(path[i]);
    const auto a = lloyd_max(samples, 2);
    const auto b = lloyd_max(support, law, 2);
    for (std::size_t i = 0; i < 2; ++i) CHECK(a.codebook[i] == doctest::Approx(b.codebook[i]).epsilon(0.02));
}

TEST_CASE("single-state codebooks reduce to plain Lloyd-Max") {
    const auto source = zdc_test::benchmark_source();
    const auto path = sample_path(source, 50000, 4);
    std::vector<double> samples(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) samples[i] = source.value(path[i]);
    const auto cb = train_ofssq(samples, 1, 4, ClassifierMode::lloyd_max);
    const auto plain = lloyd_max(samples, 4);
    REQUIRE(cb.per_state.size() == 1);
    // With one class the bucket is the sample shifted by one element; the
    // designs must agree to sampling precision.
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(cb.per_state[0].codebook[i] == doctest::Approx(plain.codebook[i]).epsilon(0.01));
}

TEST_CASE("i.i.d. data makes every per-state codebook identical") {
    // Memoryless training data: conditioning on the previous class changes
    // nothing, so all states converge to (nearly) the same design.
    const auto source = zdc_test::iid_source({0.15, 0.2, 0.3, 0.2, 0.15}, {1, 2, 3, 4, 5});
    const auto path = sample_path(source, 400000, 5);
    std::vector<double> samples(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) samples[i] = source.value(path[i]);
    const auto cb = train_ofssq(samples, 3, 2, ClassifierMode::lloyd_max);
    for (std::size_t s = 1; s < cb.per_state.size(); ++s)
        for (std::size_t i = 0; i < 2; ++i)
            CHECK(cb.per_state[s].codebook[i] ==
                  doctest::Approx(cb.per_state[0].codebook[i]).epsilon(0.02));
}

TEST_CASE("identity classifier requires a matching alphabet") {
    const std::vector<double> samples{1, 2, 1, 2, 1, 2, 2, 1};
    CHECK_THROWS_AS(train_ofssq(samples, 3, 2, ClassifierMode::identity), ConfigMismatch);
    CHECK_THROWS_AS(
        train_ofssq(samples, 3, 2, ClassifierMode::identity, std::vector<double>{1, 2}),
        ConfigMismatch);
    const auto cb =
        train_ofssq(samples, 2, 2, ClassifierMode::identity, std::vector<double>{1, 2});
    CHECK(cb.classifier.encode(1.0) == 0);
    CHECK(cb.classifier.encode(2.0) == 1);
}

TEST_CASE("closed-loop run at full rate on a matched alphabet is lossless") {
    const auto source = zdc_test::two_state_source(0.3, 0.4);
    const auto path = sample_path(source, 20000, 6);
    std::vector<double> samples(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) samples[i] = source.value(path[i]);
    const auto cb = train_ofssq(samples, 2, 2, ClassifierMode::identity,
                                std::vector<double>{1, 2});
    const auto report = ofssq_run(cb, source, 10000, 7);
    CHECK(report.avg_distortion == 0.0);
    CHECK(report.rate_bits == doctest::Approx(1.0));
}

TEST_CASE("state conditioning on the true previous symbol cuts distortion") {
    // Nearly-sticky 2-state chain: with the training-time state (class of
    // the true previous symbol), the conditional codebooks track the chain
    // and beat the unconditioned design by a wide margin.
    const FiniteSource source({{0.95, 0.05}, {0.05, 0.95}}, {-1.0, 1.0},
                              ProbabilityVector::uniform(2));
    const auto path = sample_path(source, 200000, 8);
    std::vector<double> samples(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) samples[i] = source.value(path[i]);
    const auto cb = train_ofssq(samples, 2, 1, ClassifierMode::lloyd_max);
    const auto global = lloyd_max(samples, 1);
    double cond = 0.0, uncond = 0.0;
    for (std::size_t t = 1; t < samples.size(); ++t) {
        const std::size_t state = cb.classifier.encode(samples[t - 1]);
        const double ec = samples[t] - cb.per_state[state].quantize_value(samples[t]);
        const double eg = samples[t] - global.quantize_value(samples[t]);
        cond += ec * ec;
        uncond += eg * eg;
    }
    CHECK(cond < 0.5 * uncond);
}
