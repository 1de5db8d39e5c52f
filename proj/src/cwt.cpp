#include "circtz/features.hpp"
#include "circtz/kernels.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace circtz {
namespace {

struct MorletTaps {
    std::ptrdiff_t radius = 0;
    // conj(psi(m / s)) for m = -radius..radius, split into real and imaginary parts.
    std::vector<double> re;
    std::vector<double> im;
};

MorletTaps morlet_taps(double scale, const CwtConfig& config) {
    MorletTaps taps;
    taps.radius = static_cast<std::ptrdiff_t>(std::ceil(config.support_factor * scale));
    const std::size_t width = static_cast<std::size_t>(2 * taps.radius + 1);
    taps.re.resize(width);
    taps.im.resize(width);
    const double norm = 1.0 / std::sqrt(std::numbers::pi * config.bandwidth);
    for (std::ptrdiff_t m = -taps.radius; m <= taps.radius; ++m) {
        const double u = static_cast<double>(m) / scale;
        const double envelope = norm * std::exp(-u * u / config.bandwidth);
        const double angle = 2.0 * std::numbers::pi * config.center_frequency * u;
        taps.re[static_cast<std::size_t>(m + taps.radius)] = envelope * std::cos(angle);
        taps.im[static_cast<std::size_t>(m + taps.radius)] = -envelope * std::sin(angle);
    }
    return taps;
}

double scale_for_period(double period_hours, const CwtConfig& config) { return config.center_frequency * period_hours; }

std::ptrdiff_t max_radius(const CwtConfig& config) {
    double period = config.period_hours;
    if (config.band) {
        period = std::max(period, static_cast<double>(config.band->second));
    }
    return static_cast<std::ptrdiff_t>(std::ceil(config.support_factor * scale_for_period(period, config)));
}

// Interior coefficients n in [radius, N - radius) with full wavelet support.
void interior_coefficients(std::span<const double> x, const MorletTaps& taps, std::ptrdiff_t first,
                           std::ptrdiff_t last, std::vector<std::complex<double>>& out) {
    const auto& kt = kernels::active();
    out.resize(static_cast<std::size_t>(last - first));
    for (std::ptrdiff_t n = first; n < last; ++n) {
        double re = 0.0;
        double im = 0.0;
        kt.dot2(x.data() + (n - taps.radius), taps.re.data(), taps.im.data(), taps.re.size(), &re, &im);
        out[static_cast<std::size_t>(n - first)] = {re, im};
    }
}

double wrap_angle(double a) {
    // into (-pi, pi]
    double r = std::remainder(a, 2.0 * std::numbers::pi);
    if (r <= -std::numbers::pi) {
        r += 2.0 * std::numbers::pi;
    }
    return r;
}

}  // namespace

std::size_t cwt_min_length(const CwtConfig& config) {
    return static_cast<std::size_t>(2 * max_radius(config) + 2 * kHoursPerDay);
}

std::vector<std::pair<double, double>> morlet_coefficients(std::span<const double> x, double scale,
                                                           const CwtConfig& config) {
    const MorletTaps taps = morlet_taps(scale, config);
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    std::vector<std::pair<double, double>> out(x.size());
    const auto& kt = kernels::active();
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - taps.radius);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + taps.radius);
        const std::size_t t0 = static_cast<std::size_t>(lo - (i - taps.radius));
        double re = 0.0;
        double im = 0.0;
        kt.dot2(x.data() + lo, taps.re.data() + t0, taps.im.data() + t0, static_cast<std::size_t>(hi - lo + 1), &re,
                &im);
        out[static_cast<std::size_t>(i)] = {re, im};
    }
    return out;
}

RhythmFeatures cwt_features(const ActivitySeries& series, const CwtConfig& config) {
    if (series.stage != Stage::Detrended) {
        throw DataError("cwt_features expects a detrended series");
    }
    const std::size_t min_len = cwt_min_length(config);
    if (series.size() < min_len) {
        throw DataError("insufficient span for the 24 h wavelet: " + std::to_string(series.size()) + " hours, need " +
                        std::to_string(min_len));
    }
    const auto n = static_cast<std::ptrdiff_t>(series.size());
    const std::ptrdiff_t edge = max_radius(config);
    const std::ptrdiff_t first = edge;
    const std::ptrdiff_t last = n - edge;

    RhythmFeatures out;
    out.scale = scale_for_period(config.period_hours, config);

    std::vector<std::complex<double>> coeffs;
    interior_coefficients(series.counts, morlet_taps(out.scale, config), first, last, coeffs);

    HourVector power_sum{};
    HourVector cos_sum{};
    HourVector sin_sum{};
    HourVector jump_sum{};
    std::array<std::size_t, kHoursPerDay> k{};
    std::array<std::size_t, kHoursPerDay> pairs{};
    std::vector<double> phase(coeffs.size());
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        phase[i] = std::arg(coeffs[i]);
    }
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        const auto h = static_cast<std::size_t>(hour_of_day(series.start_hour + first + static_cast<std::ptrdiff_t>(i)));
        power_sum[h] += std::norm(coeffs[i]);
        cos_sum[h] += std::cos(phase[i]);
        sin_sum[h] += std::sin(phase[i]);
        ++k[h];
        if (i >= static_cast<std::size_t>(kHoursPerDay)) {
            jump_sum[h] += std::abs(wrap_angle(phase[i] - phase[i - kHoursPerDay]));
            ++pairs[h];
        }
    }

    if (config.band) {
        power_sum.fill(0.0);
        int n_scales = 0;
        for (int period = config.band->first; period <= config.band->second; ++period) {
            std::vector<std::complex<double>> band_coeffs;
            interior_coefficients(series.counts, morlet_taps(scale_for_period(period, config), config), first, last,
                                  band_coeffs);
            for (std::size_t i = 0; i < band_coeffs.size(); ++i) {
                const auto h =
                    static_cast<std::size_t>(hour_of_day(series.start_hour + first + static_cast<std::ptrdiff_t>(i)));
                power_sum[h] += std::norm(band_coeffs[i]);
            }
            ++n_scales;
        }
        for (double& p : power_sum) {
            p /= n_scales;
        }
    }

    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
        const double kh = static_cast<double>(k[h]);
        out.power[h] = power_sum[h] / kh;
        out.mean_phase[h] = std::atan2(sin_sum[h], cos_sum[h]);
        out.coherence[h] = std::min(1.0, std::hypot(cos_sum[h], sin_sum[h]) / kh);
        out.stability[h] = jump_sum[h] / static_cast<double>(pairs[h]);
    }
    return out;
}

}  // namespace circtz
