#include "circtz/preprocess.hpp"

#include "circtz/common.hpp"
#include "circtz/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace circtz {

double ActivitySeries::total() const { return std::accumulate(counts.begin(), counts.end(), 0.0); }

void DetrendConfig::validate() const {
    if (window_hours < 24 || window_hours % 2 != 0) {
        throw UsageError("hann window must be even and >= 24 hours, got " + std::to_string(window_hours));
    }
    if (min_nonzero < 1) {
        throw UsageError("min-nonzero must be >= 1, got " + std::to_string(min_nonzero));
    }
}

bool sparsity_filter(const ActivitySeries& series, int min_nonzero) {
    const auto nonzero = std::count_if(series.counts.begin(), series.counts.end(), [](double c) { return c > 0.0; });
    return nonzero >= min_nonzero;
}

ActivitySeries log_transform(ActivitySeries series) {
    if (series.stage != Stage::Raw) {
        throw DataError("log_transform expects a raw series");
    }
    for (double& c : series.counts) {
        if (c < 0.0) {
            throw DataError("negative count in raw series");
        }
        c = std::log1p(c);
    }
    series.stage = Stage::Logged;
    return series;
}

double hann_weight(int k, int window_hours) {
    return 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(window_hours)));
}

std::vector<double> hann_trend(std::span<const double> x, int window_hours) {
    const std::ptrdiff_t half = window_hours / 2;
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());

    std::vector<double> weights(static_cast<std::size_t>(window_hours + 1));
    for (std::ptrdiff_t k = -half; k <= half; ++k) {
        weights[static_cast<std::size_t>(k + half)] = hann_weight(static_cast<int>(k), window_hours);
    }
    // prefix[i] = sum of weights[0, i)
    std::vector<double> prefix(weights.size() + 1, 0.0);
    std::partial_sum(weights.begin(), weights.end(), prefix.begin() + 1);

    const auto& kt = kernels::active();
    std::vector<double> trend(x.size());
    for (std::ptrdiff_t t = 0; t < n; ++t) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, t - half);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, t + half);
        const std::size_t w0 = static_cast<std::size_t>(lo - (t - half));
        const std::size_t len = static_cast<std::size_t>(hi - lo + 1);
        const double num = kt.dot(x.data() + lo, weights.data() + w0, len);
        const double den = prefix[w0 + len] - prefix[w0];
        trend[static_cast<std::size_t>(t)] = num / den;
    }
    return trend;
}

ActivitySeries hann_detrend(ActivitySeries series, const DetrendConfig& config) {
    config.validate();
    if (series.stage != Stage::Logged) {
        throw DataError("hann_detrend expects a logged series");
    }
    if (series.counts.empty()) {
        throw DataError("cannot detrend an empty series");
    }
    if (series.counts.size() < static_cast<std::size_t>(config.window_hours)) {
        const double mean = series.total() / static_cast<double>(series.counts.size());
        for (double& c : series.counts) {
            c -= mean;
        }
        series.detrend_fallback = true;
    } else {
        const auto trend = hann_trend(series.counts, config.window_hours);
        for (std::size_t t = 0; t < series.counts.size(); ++t) {
            series.counts[t] -= trend[t];
        }
    }
    series.stage = Stage::Detrended;
    return series;
}

ActivitySeries preprocess(ActivitySeries raw, const DetrendConfig& config) {
    return hann_detrend(log_transform(std::move(raw)), config);
}

}  // namespace circtz
