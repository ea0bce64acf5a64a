#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "zdc/evaluation.hpp"

using namespace zdc;

namespace {

Policy identity_policy(std::size_t m, int n) {
    Policy p;
    p.n = n;
    p.fallback = Quantizer::identity(m);
    return p;
}

Policy uninformative_policy(std::size_t m, int n) {
    Policy p;
    p.n = n;
    p.fallback = Quantizer::uninformative(m);
    return p;
}

} // namespace

TEST_CASE("snr_db") {
    CHECK(snr_db(1.0, 1.0) == doctest::Approx(0.0));
    CHECK(snr_db(1.0, 0.1) == doctest::Approx(10.0));
    CHECK(snr_db(4.0, 1.0) == doctest::Approx(10.0 * std::log10(4.0)));
    CHECK_THROWS_AS(snr_db(0.0, 1.0), NonPositiveInput);
    CHECK_THROWS_AS(snr_db(1.0, 0.0), NonPositiveInput);
    CHECK_THROWS_AS(snr_db(1.0, -2.0), NonPositiveInput);
}

TEST_CASE("full-rate identity policy is lossless") {
    const auto source = zdc_test::benchmark_source();
    const auto dist = DistortionSpec::squared_error(source.alphabet_values());
    const auto report = evaluate_policy(source, identity_policy(8, 1), dist, 20000, 3);
    CHECK(report.avg_distortion == 0.0);
    CHECK(report.lossless());
    CHECK(std::isinf(report.snr_db));
    CHECK(report.rate_bits == doctest::Approx(3.0));
    CHECK(report.T == 20000);
}

TEST_CASE("variance reported matches the stationary second moment") {
    const auto source = zdc_test::two_state_source(0.5, 0.5);
    const auto dist = DistortionSpec::squared_error(source.alphabet_values());
    const auto report = evaluate_policy(source, identity_policy(2, 1), dist, 1000, 3);
    // zeta = (1/2, 1/2) over values {1, 2}: variance 1/4.
    CHECK(report.var_x == doctest::Approx(0.25));
    CHECK(report.rate_bits == doctest::Approx(1.0));
}

TEST_CASE("rate accounts for every quantizer in the policy") {
    const auto source = zdc_test::benchmark_source();
    const auto dist = DistortionSpec::squared_error(source.alphabet_values());
    Policy p = uninformative_policy(8, 1);
    // One mapped state using 4 channel symbols dominates the fallback's 1.
    p.action_map.emplace(table_key(quantize(invariant_distribution(source), 1)),
                         Quantizer(std::vector<int>{0, 0, 1, 1, 2, 2, 3, 3}));
    const auto report = evaluate_policy(source, p, dist, 100, 3);
    CHECK(report.rate_bits == doctest::Approx(2.0));
}

TEST_CASE("discounted cost of a constant-rate-0 policy matches the geometric series") {
    // Symmetric 2-state source, uninformative quantizer: the decoder always
    // reconstructs value 1 (tie toward the lowest index), so the per-step
    // distortion is Bernoulli(1/2) over {0, 1}.
    const auto source = zdc_test::two_state_source(0.5, 0.5);
    const auto dist = DistortionSpec::squared_error(source.alphabet_values());
    const double beta = 0.99;
    const std::uint64_t horizon = discount_horizon(beta, 1.0, 1e-6);
    const double est =
        discounted_cost_estimate(source, uninformative_policy(2, 1), dist, beta, horizon, 500, 7);
    const double want = 0.5 / (1.0 - beta);
    // Std. dev. of one run is sqrt(Var(d)/(1-beta^2)); 500 runs.
    const double sigma = std::sqrt(0.25 / (1.0 - beta * beta)) / std::sqrt(500.0);
    CHECK(std::abs(est - want) <= 3.0 * sigma + 1e-4);
}

TEST_CASE("discount_horizon bounds the truncated tail") {
    const double beta = 0.99, cmax = 12.25, eps = 1e-6;
    const std::uint64_t h = discount_horizon(beta, cmax, eps);
    CHECK(cmax * std::pow(beta, static_cast<double>(h)) / (1.0 - beta) <= eps);
    CHECK(discount_horizon(0.5, 1e-9, 1.0) == 1);
}

TEST_CASE("vanishing-discount scaling links discounted and average cost") {
    const auto source = zdc_test::benchmark_source();
    const auto dist = DistortionSpec::squared_error(source.alphabet_values());
    const ProbabilityVector zeta = invariant_distribution(source);
    Policy p;
    p.n = 1;
    p.fallback = myopic_best_quantizer(zeta, dist, source.alphabet_values(),
                                       {8, 2, QuantizerMode::full});
    const double beta = 0.9999;
    const std::uint64_t horizon = 200000;
    const double J = discounted_cost_estimate(source, p, dist, beta, horizon, 8, 11);
    const auto report = evaluate_policy(source, p, dist, 2000000, 13);
    CHECK((1.0 - beta) * J == doctest::Approx(report.avg_distortion).epsilon(0.02));
}

TEST_CASE("average distortion is stable across seeds") {
    const auto source = zdc_test::benchmark_source();
    const auto dist = DistortionSpec::squared_error(source.alphabet_values());
    Policy p;
    p.n = 1;
    p.fallback = myopic_best_quantizer(invariant_distribution(source), dist,
                                       source.alphabet_values(), {8, 2, QuantizerMode::full});
    const auto a = evaluate_policy(source, p, dist, 1000000, 101);
    const auto b = evaluate_policy(source, p, dist, 1000000, 202);
    CHECK(std::abs(a.avg_distortion - b.avg_distortion) / a.avg_distortion < 0.01);
}

TEST_CASE("relabeling channel symbols leaves the run unchanged") {
    const auto source = zdc_test::benchmark_source();
    const auto dist = DistortionSpec::squared_error(source.alphabet_values());
    Policy p = uninformative_policy(8, 2);
    p.fallback = Quantizer(std::vector<int>{0, 0, 0, 0, 1, 1, 1, 1});
    Policy relabeled = p;
    for (int& v : relabeled.fallback.map) v = 1 - v; // swap the two symbols
    const auto a = evaluate_policy(source, p, dist, 50000, 5);
    const auto b = evaluate_policy(source, relabeled, dist, 50000, 5);
    CHECK(a.avg_distortion == b.avg_distortion);
    CHECK(a.rate_bits == b.rate_bits);
}

TEST_CASE("filter stability diagnostic") {
    SUBCASE("equal priors give an identically zero trace") {
        const auto source = zdc_test::benchmark_source();
        const auto zeta = invariant_distribution(source);
        const auto trace = filter_stability_diagnostic(source, zeta, zeta, 1000, 3);
        for (double v : trace) CHECK(v == 0.0);
    }
    SUBCASE("i.i.d. source forgets the prior after one step") {
        const std::vector<double> zeta{0.5, 0.3, 0.2};
        const auto source = zdc_test::iid_source(zeta, {1, 2, 3});
        const auto trace = filter_stability_diagnostic(
            source, ProbabilityVector(zeta), ProbabilityVector::uniform(3), 100, 4);
        CHECK(trace[0] > 0.0);
        for (std::size_t t = 1; t < trace.size(); ++t) CHECK(trace[t] < 1e-12);
    }
    SUBCASE("benchmark source forgets a uniform prior") {
        const auto source = zdc_test::benchmark_source();
        const auto trace = filter_stability_diagnostic(source, invariant_distribution(source),
                                                       ProbabilityVector::uniform(8), 200, 5);
        CHECK(trace.back() < 1e-3);
    }
    SUBCASE("dimension mismatch is rejected") {
        const auto source = zdc_test::two_state_source(0.1, 0.2);
        CHECK_THROWS_AS(filter_stability_diagnostic(source, ProbabilityVector::uniform(3),
                                                    ProbabilityVector::uniform(2), 10, 6),
                        DimensionMismatch);
    }
}
