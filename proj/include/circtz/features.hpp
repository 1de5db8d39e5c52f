#pragma once

#include "circtz/common.hpp"
#include "circtz/preprocess.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace circtz {

/// Hour-of-day distribution of preprocessed activity, indexed by UTC hour 0..23.
struct HourlyProfile {
    HourVector p{};
    /// Per-hour sums c_h of the min-shifted detrended series.
    HourVector support_counts{};
    /// Zero total mass; p was set to uniform.
    bool degenerate = false;
};

/// Expected counts of a cyclic Poisson spline fit. log(lambda) = intercept + sum_j coeffs[j] * b_j(h).
struct SmoothedProfile {
    HourVector lambda{};
    /// lambda on a grid of `grid_per_hour` points per hour starting at 0.
    std::vector<double> fine;
    int grid_per_hour = 10;
    double intercept = 0.0;
    std::vector<double> coeffs;
    int basis_size = 0;
    int iterations = 0;
    bool converged = false;
};

/// Morlet wavelet statistics at the 24 h scale, aggregated by UTC hour.
struct RhythmFeatures {
    HourVector power{};
    HourVector mean_phase{};
    HourVector coherence{};
    HourVector stability{};
    double scale = 24.0;
};

struct ScalarFeatures {
    int h_min = 0;
    double h_smooth_min = 0.0;
    int h_stable_phase = 0;
};

struct GamConfig {
    /// Second-difference penalty weight, multiplied by the mean count so the fit is scale invariant.
    double smoothing = 0.35;
    double ridge = 1e-8;
    int max_iterations = 100;
    double tolerance = 1e-8;
    int grid_per_hour = 10;
};

struct CwtConfig {
    double center_frequency = 1.0;
    double bandwidth = 1.5;
    double period_hours = 24.0;
    /// Coefficients closer than support_factor * scale to either edge are discarded.
    double support_factor = 4.0;
    /// Optional inclusive period band (hours) whose power is averaged; phase stays at period_hours.
    std::optional<std::pair<int, int>> band;
};

struct FeatureConfig {
    DetrendConfig detrend;
    GamConfig gam;
    CwtConfig cwt;
};

/// Cubic cardinal B-spline centred at 0 with support (-2, 2).
double cubic_bspline(double u);

/// Hourly profile of a detrended series. The series is shifted by its minimum before summation.
HourlyProfile hourly_profile(const ActivitySeries& series);

/// Penalized IRLS fit of a Poisson GAM with 24 cyclic cubic B-splines (knots on the hours).
/// Throws DataError for all-zero counts; a non-converged fit is returned with converged = false.
SmoothedProfile fit_cyclic_gam(std::span<const double, kHoursPerDay> counts, const GamConfig& config = {});

/// Evaluates a fitted spline at an arbitrary hour in [0, 24).
double evaluate_gam(const SmoothedProfile& fit, double hour);

/// Minimum series length accepted by cwt_features.
std::size_t cwt_min_length(const CwtConfig& config);

/// Complex Morlet coefficients W_n at one scale for every n; edge coefficients are computed
/// with the in-range samples only.
std::vector<std::pair<double, double>> morlet_coefficients(std::span<const double> x, double scale,
                                                           const CwtConfig& config);

/// Throws DataError("insufficient span ...") when the series is shorter than cwt_min_length.
RhythmFeatures cwt_features(const ActivitySeries& series, const CwtConfig& config = {});

/// Arg-extrema with the smallest-index tie-break.
ScalarFeatures extract_scalars(const HourlyProfile& profile, const SmoothedProfile& smoothed,
                               const RhythmFeatures& rhythm);

/// Everything the inference methods consume for one community.
struct CommunityFeatures {
    std::string community_id;
    std::optional<int> offset_minutes;
    std::int64_t start_hour = 0;
    std::size_t n_hours = 0;
    double total_events = 0.0;
    HourlyProfile profile;
    SmoothedProfile smoothed;
    RhythmFeatures rhythm;
    ScalarFeatures scalars;
    bool detrend_fallback = false;
    bool gam_converged = true;
};

/// Full chain from a raw series: preprocess, profile, GAM, CWT, scalars.
CommunityFeatures compute_features(const std::string& community_id, const ActivitySeries& raw,
                                   const FeatureConfig& config);

/// Rotates every hour-indexed feature by `hours` (p'[(h + hours) mod 24] = p[h]).
HourVector rotate(const HourVector& v, int hours);

void write_features(const std::filesystem::path& path, std::span<const CommunityFeatures> features);
std::vector<CommunityFeatures> read_features(const std::filesystem::path& path);

}  // namespace circtz
