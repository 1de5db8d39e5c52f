#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace circtz {

enum class Stage { Raw, Logged, Detrended };

/// Uniformly spaced hourly activity of one community. `start_hour` is floor(unix_seconds / 3600).
struct ActivitySeries {
    std::int64_t start_hour = 0;
    std::vector<double> counts;
    Stage stage = Stage::Raw;
    /// Set by hann_detrend when the series was shorter than the window and the global mean was removed instead.
    bool detrend_fallback = false;

    std::size_t size() const { return counts.size(); }
    std::int64_t end_hour() const { return start_hour + static_cast<std::int64_t>(counts.size()); }
    double total() const;
};

struct DetrendConfig {
    int window_hours = 384;
    int min_nonzero = 50;

    /// Throws UsageError unless the window is even and >= 24 and min_nonzero >= 1.
    void validate() const;
};

/// True when the series has at least `min_nonzero` strictly positive hours.
bool sparsity_filter(const ActivitySeries& series, int min_nonzero);

/// counts -> ln(1 + counts); requires a raw series.
ActivitySeries log_transform(ActivitySeries series);

/// Hann taper weight 0.5 * (1 + cos(2 pi k / W)) for |k| <= W/2.
double hann_weight(int k, int window_hours);

/// Centered Hann-weighted moving average. Near the edges the weights are
/// renormalized over the in-range samples; nothing is padded.
std::vector<double> hann_trend(std::span<const double> x, int window_hours);

/// x_t - trend_t on a logged series. Series shorter than the window fall back
/// to removing the global mean and set `detrend_fallback`.
ActivitySeries hann_detrend(ActivitySeries series, const DetrendConfig& config);

/// log_transform followed by hann_detrend.
ActivitySeries preprocess(ActivitySeries raw, const DetrendConfig& config);

}  // namespace circtz
