#include "doctest.h"
#include "support.hpp"

#include "circtz/preprocess.hpp"

#include <cmath>
#include <numbers>

using namespace circtz;

namespace {

// Direct weighted average over the in-range neighbours, long double throughout.
std::vector<double> brute_trend(const std::vector<double>& x, int W) {
    const int n = static_cast<int>(x.size());
    std::vector<double> out(x.size());
    for (int t = 0; t < n; ++t) {
        long double num = 0, den = 0;
        for (int k = -W / 2; k <= W / 2; ++k) {
            if (t + k < 0 || t + k >= n) continue;
            long double w = 0.5L * (1.0L + std::cos(2.0L * std::numbers::pi_v<long double> * k / W));
            num += w * x[static_cast<std::size_t>(t + k)];
            den += w;
        }
        out[static_cast<std::size_t>(t)] = static_cast<double>(num / den);
    }
    return out;
}

}  // namespace

TEST_CASE("sparsity filter threshold is inclusive") {
    ActivitySeries s;
    s.counts.assign(200, 0.0);
    for (int i = 0; i < 49; ++i) s.counts[static_cast<std::size_t>(i * 3)] = 1.0;
    CHECK_FALSE(sparsity_filter(s, 50));
    s.counts[199] = 2.0;
    CHECK(sparsity_filter(s, 50));
}

TEST_CASE("log transform is ln(1 + c)") {
    ActivitySeries s;
    s.counts = {0.0, 10.0, 1e6};
    auto l = log_transform(s);
    CHECK(l.stage == Stage::Logged);
    CHECK(l.counts[0] == 0.0);
    CHECK(l.counts[1] == doctest::Approx(std::log(11.0)).epsilon(1e-15));
    // a million-fold burst shrinks to under six times a ten-count hour
    CHECK(l.counts[2] / l.counts[1] == doctest::Approx(5.7615).epsilon(1e-4));
    CHECK_THROWS_AS(log_transform(l), DataError);

    ActivitySeries neg;
    neg.counts = {1.0, -1.0};
    CHECK_THROWS_AS(log_transform(neg), DataError);
}

TEST_CASE("hann weights") {
    CHECK(hann_weight(0, 384) == doctest::Approx(1.0));
    CHECK(hann_weight(192, 384) == doctest::Approx(0.0));
    CHECK(hann_weight(96, 384) == doctest::Approx(0.5));
}

TEST_CASE("hann trend matches a direct weighted average, edges renormalized") {
    Rng rng(5);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int W : {24, 48, 384}) {
        for (std::size_t n : {std::size_t{30}, std::size_t{500}}) {
            std::vector<double> x(n);
            for (auto& v : x) v = noise(rng);
            auto got = hann_trend(x, W);
            auto want = brute_trend(x, W);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("detrending removes a constant level exactly enough") {
    ActivitySeries s;
    s.counts.assign(1000, 7.0);
    auto d = preprocess(s, DetrendConfig{});
    CHECK(d.stage == Stage::Detrended);
    CHECK_FALSE(d.detrend_fallback);
    for (double v : d.counts) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("series shorter than the window fall back to mean removal") {
    ActivitySeries s;
    s.counts = {0, 1, 2, 3, 4, 5, 6, 7};
    auto d = preprocess(s, DetrendConfig{});
    CHECK(d.detrend_fallback);
    double mean = 0;
    for (double c : s.counts) mean += std::log1p(c);
    mean /= 8.0;
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(d.counts[i] == doctest::Approx(std::log1p(s.counts[i]) - mean).epsilon(1e-14));
    }
}

TEST_CASE("detrend config validation") {
    CHECK_THROWS_AS((DetrendConfig{385, 50}.validate()), UsageError);
    CHECK_THROWS_AS((DetrendConfig{12, 50}.validate()), UsageError);
    CHECK_THROWS_AS((DetrendConfig{384, 0}.validate()), UsageError);
    CHECK_NOTHROW((DetrendConfig{24, 1}.validate()));
}

TEST_CASE("detrend requires a logged series") {
    ActivitySeries s;
    s.counts = {1, 2, 3};
    CHECK_THROWS_AS(hann_detrend(s, DetrendConfig{}), DataError);
}
