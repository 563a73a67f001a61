#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "strobe/stats.hpp"

using namespace strobe;

namespace {

TimeDistribution dist(std::vector<double> times, std::vector<double> probs) {
    TimeDistribution d;
    d.times = std::move(times);
    d.probs = std::move(probs);
    return d;
}

}  // namespace

TEST_CASE("total variation distance") {
    const auto a = dist({0.0, 1.0}, {1.0, 0.0});
    const auto b = dist({0.0, 1.0}, {0.0, 1.0});
    CHECK(tv_distance(a, a) == doctest::Approx(0.0));
    CHECK(tv_distance(a, b) == doctest::Approx(1.0));

    const auto c = dist({0.0, 1.0}, {0.5, 0.5});
    const auto d = dist({0.0, 1.0}, {0.25, 0.75});
    CHECK(tv_distance(c, d) == doctest::Approx(0.25));
    CHECK(tv_distance(d, c) == doctest::Approx(0.25));

    const auto shifted = dist({0.0, 2.0}, {0.5, 0.5});
    CHECK_THROWS_AS(tv_distance(c, shifted), Error);
    const auto longer = dist({0.0, 1.0, 2.0}, {0.5, 0.25, 0.25});
    CHECK_THROWS_AS(tv_distance(c, longer), Error);

    TimeDistribution undef;
    undef.status = DistStatus::undefined;
    undef.times = {0.0, 1.0};
    CHECK_THROWS_AS(tv_distance(undef, c), Error);
}

TEST_CASE("distribution moments") {
    const auto d = dist({0.0, 1.0, 2.0}, {0.25, 0.5, 0.25});
    CHECK(dist_mean(d) == doctest::Approx(1.0));
    CHECK(dist_variance(d) == doctest::Approx(0.5));

    const auto point = dist({3.0, 4.0}, {0.0, 1.0});
    CHECK(dist_mean(point) == doctest::Approx(4.0));
    CHECK(dist_variance(point) == doctest::Approx(0.0));
}

TEST_CASE("sample statistics use the unbiased divisor") {
    const std::vector<double> xs{1.0, 2.0, 3.0};
    CHECK(sample_mean(xs) == doctest::Approx(2.0));
    CHECK(sample_variance(xs) == doctest::Approx(1.0));
    CHECK_THROWS_AS(sample_mean({}), Error);
    CHECK_THROWS_AS(sample_variance({5.0}), Error);
}

TEST_CASE("polynomial fit recovers exact coefficients") {
    std::vector<double> x, y;
    for (int i = 0; i <= 8; ++i) {
        const double xi = -1.0 + 0.25 * i;
        x.push_back(xi);
        y.push_back(2.0 - 3.0 * xi + 0.5 * xi * xi);
    }
    const auto quad = polyfit(x, y, 2);
    REQUIRE(quad.size() == 3);
    CHECK(quad[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(quad[1] == doctest::Approx(-3.0).epsilon(1e-12));
    CHECK(quad[2] == doctest::Approx(0.5).epsilon(1e-12));

    // Overfitting a line with a cubic zeroes the upper coefficients.
    std::vector<double> yl;
    for (double xi : x) yl.push_back(7.0 + 2.0 * xi);
    const auto cubic = polyfit(x, yl, 3);
    CHECK(cubic[0] == doctest::Approx(7.0).epsilon(1e-10));
    CHECK(cubic[1] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(std::abs(cubic[2]) < 1e-10);
    CHECK(std::abs(cubic[3]) < 1e-10);

    CHECK_THROWS_AS(polyfit({1.0, 2.0}, {1.0}, 1), Error);
    CHECK_THROWS_AS(polyfit({1.0, 2.0}, {1.0, 2.0}, 2), Error);
}

TEST_CASE("chi-square critical values track the exact quantiles") {
    // Spot checks against tabulated chi-square quantiles.
    CHECK(chi2_critical(10.0, 1.6448536) == doctest::Approx(18.307).epsilon(0.005));
    CHECK(chi2_critical(2.0, 1.6448536) == doctest::Approx(5.991).epsilon(0.02));
    CHECK(chi2_critical(100.0, 2.3263479) == doctest::Approx(135.807).epsilon(0.005));
    // The median sits near dof - 2/3.
    CHECK(chi2_critical(30.0, 0.0) == doctest::Approx(29.336).epsilon(0.005));
}

TEST_CASE("columnwise position statistics") {
    OutcomeBinning bins;
    bins.mode = BinningMode::position_bins;
    bins.bin_edges = {-3.0, -1.0, 1.0, 3.0};  // centres -2, 0, 2

    CountsMatrix counts;
    counts.times = {0.0, 1.0};
    counts.counts = {{1, 0}, {2, 0}, {1, 4}};
    counts.shots_per_time = 4;

    CHECK(column_position_mean(counts, bins, 0) == doctest::Approx(0.0));
    // Population variance over the four samples {-2, 0, 0, 2}.
    CHECK(column_position_variance(counts, bins, 0) == doctest::Approx(2.0));
    CHECK(column_position_mean(counts, bins, 1) == doctest::Approx(2.0));
    CHECK(column_position_variance(counts, bins, 1) == doctest::Approx(0.0));

    CHECK_THROWS_AS(column_position_mean(counts, bins, 2), Error);
    CHECK_THROWS_AS(column_position_mean(counts, OutcomeBinning::window(0.0, 1.0), 0), Error);
}
