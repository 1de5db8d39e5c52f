#include "doctest.h"
#include "support.hpp"

#include "circtz/features.hpp"
#include "circtz/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

using namespace circtz;

namespace {

constexpr double kPi = std::numbers::pi;

ActivitySeries detrended_series(std::vector<double> x, std::int64_t start = 0) {
    ActivitySeries s;
    s.start_hour = start;
    s.counts = std::move(x);
    s.stage = Stage::Detrended;
    return s;
}

// Morlet coefficient at n by direct summation in long double, same truncation radius.
std::complex<long double> brute_morlet(const std::vector<double>& x, std::ptrdiff_t n, long double s, long double B,
                                       long double C, std::ptrdiff_t radius) {
    std::complex<long double> acc = 0;
    const long double pi = std::numbers::pi_v<long double>;
    for (std::ptrdiff_t m = -radius; m <= radius; ++m) {
        const long double u = m / s;
        const long double env = std::exp(-u * u / B) / std::sqrt(pi * B);
        const std::complex<long double> psi_conj = std::polar(env, -2.0L * pi * C * u);
        acc += static_cast<long double>(x[static_cast<std::size_t>(n + m)]) * psi_conj;
    }
    return acc;
}

}  // namespace

TEST_CASE("hourly profile of activity at a single hour") {
    std::vector<double> x(24 * 20, 0.0);
    for (std::size_t d = 0; d < 20; ++d) x[d * 24 + 7] = 1.0;
    auto p = hourly_profile(detrended_series(x));
    for (int h = 0; h < 24; ++h) CHECK(p.p[static_cast<std::size_t>(h)] == (h == 7 ? 1.0 : 0.0));
}

TEST_CASE("hourly profile of uniform activity, and the flat case") {
    std::vector<double> x(24 * 10, 1.0);
    // min shift turns the one 0 into the floor; the 2 on the same hour restores its sum
    x[5] = 0.0;
    x[24 * 9 + 5] = 2.0;
    auto p = hourly_profile(detrended_series(x));
    for (double v : p.p) CHECK(v == doctest::Approx(1.0 / 24).epsilon(1e-14));

    auto flat = hourly_profile(detrended_series(std::vector<double>(48, 3.0)));
    CHECK(flat.degenerate);
    for (double v : flat.p) CHECK(v == 1.0 / 24);
}

TEST_CASE("hourly profile of a UTC-5 community has its trough at UTC 9") {
    auto [raw, label] = generate(testing::clean_spec(-300, 17, 60));
    auto p = hourly_profile(testing::detrended(raw));
    auto it = std::min_element(p.p.begin(), p.p.end());
    CHECK(it - p.p.begin() == 9);
    double sum = 0;
    for (double v : p.p) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("GAM reproduces an exp-cosine profile at the knots") {
    HourVector counts{};
    for (int h = 0; h < 24; ++h) {
        counts[static_cast<std::size_t>(h)] = 120.0 * std::exp(0.8 * std::cos(2 * kPi * (h - 15.0) / 24));
    }
    auto fit = fit_cyclic_gam(counts);
    CHECK(fit.converged);
    for (int h = 0; h < 24; ++h) {
        const double want = counts[static_cast<std::size_t>(h)];
        CHECK(std::abs(fit.lambda[static_cast<std::size_t>(h)] - want) / want < 0.02);
        CHECK(evaluate_gam(fit, h) == doctest::Approx(fit.lambda[static_cast<std::size_t>(h)]).epsilon(1e-10));
    }
    REQUIRE(fit.fine.size() == 240);
    // curve is continuous across midnight
    double max_step = 0;
    for (std::size_t i = 0; i < fit.fine.size(); ++i) {
        max_step = std::max(max_step, std::abs(fit.fine[(i + 1) % fit.fine.size()] - fit.fine[i]));
    }
    CHECK(std::abs(evaluate_gam(fit, 23.95) - evaluate_gam(fit, 0.05)) <= max_step);
}

TEST_CASE("GAM of constant counts is the constant mean") {
    HourVector counts{};
    counts.fill(42.0);
    auto fit = fit_cyclic_gam(counts);
    for (double l : fit.lambda) CHECK(l == doctest::Approx(42.0).epsilon(1e-9));
    for (double b : fit.coeffs) CHECK(std::abs(b) < 1e-6);
}

TEST_CASE("GAM scale only moves the intercept") {
    HourVector counts{};
    for (int h = 0; h < 24; ++h) counts[static_cast<std::size_t>(h)] = 5.0 + (h * 7 % 11);
    auto a = fit_cyclic_gam(counts);
    HourVector scaled = counts;
    for (double& c : scaled) c *= 13.5;
    auto b = fit_cyclic_gam(scaled);
    CHECK(b.intercept - a.intercept == doctest::Approx(std::log(13.5)).epsilon(1e-7));
    for (std::size_t j = 0; j < a.coeffs.size(); ++j) CHECK(b.coeffs[j] == doctest::Approx(a.coeffs[j]).epsilon(1e-6));
    auto arg = [](const SmoothedProfile& f) { return std::min_element(f.fine.begin(), f.fine.end()) - f.fine.begin(); };
    CHECK(arg(a) == arg(b));
}

TEST_CASE("GAM rejects all-zero counts") {
    HourVector counts{};
    CHECK_THROWS_AS(fit_cyclic_gam(counts), DataError);
}

TEST_CASE("cubic B-spline partition of unity") {
    for (double u = 0.0; u < 1.0; u += 0.125) {
        double s = 0;
        for (int k = -3; k <= 3; ++k) s += cubic_bspline(u - k);
        CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK(cubic_bspline(2.0) == 0.0);
    CHECK(cubic_bspline(0.0) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("a pure 24 h rhythm is perfectly coherent and stable") {
    std::vector<double> x(24 * 40);
    for (std::size_t t = 0; t < x.size(); ++t) x[t] = std::cos(2 * kPi * static_cast<double>(t) / 24 + 0.3);
    auto r = cwt_features(detrended_series(x, 5));
    for (int h = 0; h < 24; ++h) {
        CHECK(r.coherence[static_cast<std::size_t>(h)] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.stability[static_cast<std::size_t>(h)] < 1e-9);
        CHECK(r.power[static_cast<std::size_t>(h)] > 0.0);
    }
    CHECK(r.scale == 24.0);
}

TEST_CASE("white noise has low coherence") {
    Rng rng(99);
    std::normal_distribution<double> noise(0.0, 1.0);
    double mean_r = 0;
    const int realizations = 20;
    for (int k = 0; k < realizations; ++k) {
        std::vector<double> x(10000);
        for (auto& v : x) v = noise(rng);
        auto r = cwt_features(detrended_series(x));
        for (double c : r.coherence) mean_r += c;
    }
    mean_r /= 24.0 * realizations;
    CHECK(mean_r < 0.2);
}

TEST_CASE("phase stability under jitter matches a direct long-double transform") {
    Rng rng(4);
    std::normal_distribution<double> jitter(0.0, 0.5);
    const std::size_t days = 60;
    std::vector<double> x(24 * days);
    for (std::size_t d = 0; d < days; ++d) {
        const double phi = jitter(rng);
        for (std::size_t h = 0; h < 24; ++h) {
            x[d * 24 + h] = std::cos(2 * kPi * static_cast<double>(h) / 24 + phi);
        }
    }
    const std::int64_t start = 3;
    CwtConfig cfg;
    auto r = cwt_features(detrended_series(x, start), cfg);

    const std::ptrdiff_t radius = 96;
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    std::vector<long double> phase;
    for (std::ptrdiff_t i = radius; i < n - radius; ++i) {
        phase.push_back(std::arg(brute_morlet(x, i, 24.0L, 1.5L, 1.0L, radius)));
    }
    std::array<long double, 24> jump{};
    std::array<int, 24> cnt{};
    for (std::size_t i = 24; i < phase.size(); ++i) {
        const auto h = static_cast<std::size_t>((start + radius + static_cast<std::ptrdiff_t>(i)) % 24);
        long double d = std::remainder(phase[i] - phase[i - 24], 2.0L * std::numbers::pi_v<long double>);
        jump[h] += std::abs(d);
        ++cnt[h];
    }
    double mean_stab = 0;
    for (std::size_t h = 0; h < 24; ++h) {
        const double want = static_cast<double>(jump[h] / cnt[h]);
        CHECK(r.stability[h] == doctest::Approx(want).epsilon(1e-9));
        CHECK(r.stability[h] >= 0.0);
        CHECK(r.stability[h] <= kPi);
        mean_stab += r.stability[h] / 24;
    }
    // the wavelet averages over about a day and a half, so day-to-day phase steps shrink
    // below E|N(0, 2 sigma^2)| = 0.564 but stay well away from zero
    CHECK(mean_stab > 0.1);
    CHECK(mean_stab < 0.564);
}

TEST_CASE("wavelet needs enough span") {
    CHECK(cwt_min_length(CwtConfig{}) == 240);
    std::vector<double> x(239, 0.5);
    try {
        cwt_features(detrended_series(x));
        FAIL("expected an error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("insufficient span") != std::string::npos);
    }
    CHECK_NOTHROW(cwt_features(detrended_series(std::vector<double>(240, 0.5))));
}

TEST_CASE("scalar extraction uses the first index on ties") {
    HourlyProfile p;
    p.p.fill(1.0);
    p.p[3] = 0.5;
    p.p[15] = 0.5;
    SmoothedProfile s;
    s.fine.assign(240, 10.0);
    s.fine[89] = 1.0;
    s.fine[90] = 1.0;
    RhythmFeatures r;
    r.stability.fill(0.3);
    r.stability[9] = 0.1;
    auto sc = extract_scalars(p, s, r);
    CHECK(sc.h_min == 3);
    CHECK(sc.h_smooth_min == doctest::Approx(8.9));
    CHECK(sc.h_stable_phase == 9);
}

TEST_CASE("rotate moves index h to h + shift") {
    HourVector v{};
    for (int h = 0; h < 24; ++h) v[static_cast<std::size_t>(h)] = h;
    auto r = rotate(v, 5);
    CHECK(r[5] == 0);
    CHECK(r[4] == 23);
    CHECK(rotate(v, -19) == r);
    CHECK(rotate(v, 24) == v);
}

TEST_CASE("shifting the series start rotates every hour-indexed feature exactly") {
    SynthSpec spec = testing::clean_spec(120, 8, 40);
    spec.trough_depth = 0.7;
    spec.phase_jitter_rad = 0.3;
    auto [raw, label] = generate(spec);
    const FeatureConfig cfg;
    auto base = compute_features("x", raw, cfg);
    for (int delta : {1, 7, 13, 23}) {
        ActivitySeries moved = raw;
        moved.start_hour += delta;
        auto f = compute_features("x", moved, cfg);
        CHECK(f.profile.p == rotate(base.profile.p, delta));
        CHECK(f.smoothed.lambda == rotate(base.smoothed.lambda, delta));
        CHECK(f.rhythm.power == rotate(base.rhythm.power, delta));
        CHECK(f.rhythm.coherence == rotate(base.rhythm.coherence, delta));
        CHECK(f.rhythm.stability == rotate(base.rhythm.stability, delta));
        CHECK(f.rhythm.mean_phase == rotate(base.rhythm.mean_phase, delta));
        CHECK(f.scalars.h_min == (base.scalars.h_min + delta) % 24);
        CHECK(f.scalars.h_stable_phase == (base.scalars.h_stable_phase + delta) % 24);
        CHECK(std::lround(f.scalars.h_smooth_min * 10) == (std::lround(base.scalars.h_smooth_min * 10) + 10 * delta) % 240);
    }
}

TEST_CASE("feature CSV round-trips exactly") {
    auto dir = testing::scratch_dir("features");
    std::vector<CommunityFeatures> rows;
    for (int off : {-300, 60}) {
        auto [raw, label] = generate(testing::clean_spec(off, 2, 20));
        auto f = compute_features(label.community_id, raw, FeatureConfig{});
        f.offset_minutes = off;
        rows.push_back(f);
    }
    rows[1].offset_minutes.reset();
    write_features(dir / "f.csv", rows);
    auto back = read_features(dir / "f.csv");
    REQUIRE(back.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back[i].community_id == rows[i].community_id);
        CHECK(back[i].offset_minutes == rows[i].offset_minutes);
        CHECK(back[i].profile.p == rows[i].profile.p);
        CHECK(back[i].smoothed.lambda == rows[i].smoothed.lambda);
        CHECK(back[i].rhythm.power == rows[i].rhythm.power);
        CHECK(back[i].rhythm.stability == rows[i].rhythm.stability);
        CHECK(back[i].scalars.h_min == rows[i].scalars.h_min);
        CHECK(back[i].scalars.h_smooth_min == rows[i].scalars.h_smooth_min);
        CHECK(back[i].scalars.h_stable_phase == rows[i].scalars.h_stable_phase);
    }
}
