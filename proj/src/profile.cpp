#include "circtz/features.hpp"

#include <algorithm>
#include <cmath>

namespace circtz {

HourlyProfile hourly_profile(const ActivitySeries& series) {
    if (series.stage != Stage::Detrended) {
        throw DataError("hourly_profile expects a detrended series");
    }
    if (series.counts.empty()) {
        throw DataError("hourly_profile on an empty series");
    }
    HourlyProfile out;
    const double floor = *std::min_element(series.counts.begin(), series.counts.end());
    int hour = hour_of_day(series.start_hour);
    for (double v : series.counts) {
        out.support_counts[static_cast<std::size_t>(hour)] += v - floor;
        hour = hour == kHoursPerDay - 1 ? 0 : hour + 1;
    }
    const double total = cyclic_sum(out.support_counts);
    if (!(total > 0.0)) {
        out.p.fill(1.0 / kHoursPerDay);
        out.degenerate = true;
        return out;
    }
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
        out.p[h] = out.support_counts[h] / total;
    }
    return out;
}

namespace {

template <typename Range>
std::size_t first_argmin(const Range& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < std::size(v); ++i) {
        if (v[i] < v[best]) {
            best = i;
        }
    }
    return best;
}

}  // namespace

ScalarFeatures extract_scalars(const HourlyProfile& profile, const SmoothedProfile& smoothed,
                               const RhythmFeatures& rhythm) {
    ScalarFeatures s;
    s.h_min = static_cast<int>(first_argmin(profile.p));
    if (!smoothed.fine.empty()) {
        const auto g = first_argmin(smoothed.fine);
        s.h_smooth_min = static_cast<double>(g) / smoothed.grid_per_hour;
    } else {
        s.h_smooth_min = static_cast<double>(first_argmin(smoothed.lambda));
    }
    s.h_stable_phase = static_cast<int>(first_argmin(rhythm.stability));
    return s;
}

HourVector rotate(const HourVector& v, int hours) {
    HourVector out{};
    const int shift = ((hours % kHoursPerDay) + kHoursPerDay) % kHoursPerDay;
    for (int h = 0; h < kHoursPerDay; ++h) {
        out[static_cast<std::size_t>((h + shift) % kHoursPerDay)] = v[static_cast<std::size_t>(h)];
    }
    return out;
}

CommunityFeatures compute_features(const std::string& community_id, const ActivitySeries& raw,
                                   const FeatureConfig& config) {
    CommunityFeatures f;
    f.community_id = community_id;
    f.start_hour = raw.start_hour;
    f.n_hours = raw.size();
    f.total_events = raw.total();

    const ActivitySeries detrended = preprocess(raw, config.detrend);
    f.detrend_fallback = detrended.detrend_fallback;
    f.profile = hourly_profile(detrended);
    if (f.profile.degenerate) {
        // A flat profile carries no information; the GAM then fits a constant.
        HourVector ones{};
        ones.fill(1.0);
        f.smoothed = fit_cyclic_gam(ones, config.gam);
    } else {
        f.smoothed = fit_cyclic_gam(f.profile.support_counts, config.gam);
    }
    f.gam_converged = f.smoothed.converged;
    f.rhythm = cwt_features(detrended, config.cwt);
    f.scalars = extract_scalars(f.profile, f.smoothed, f.rhythm);
    return f;
}

}  // namespace circtz
