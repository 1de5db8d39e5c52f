#pragma once

#include "circtz/common.hpp"
#include "circtz/infer.hpp"

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace circtz {

/// Community mass per offset (minutes) among communities whose first activity falls in `year`.
struct YearlyOffsetDistribution {
    int year = 0;
    std::map<int, double> mass;

    double total() const;
    /// Mass folded onto the 24 integer hour classes -11..+12.
    HourVector hour_bins() const;
};

struct CommunityInfo {
    std::string community_id;
    std::int64_t start_hour = 0;
    int first_year = 0;
    std::size_t n_hours = 0;
    double total_events = 0.0;
};

void write_communities(const std::filesystem::path& path, std::span<const CommunityInfo> info);
std::vector<CommunityInfo> read_communities(const std::filesystem::path& path);

/// Groups predictions by first-activity year. Communities count 1 each unless `weight_by_volume`.
std::vector<YearlyOffsetDistribution> yearly_distribution(std::span<const OffsetPrediction> predictions,
                                                          std::span<const CommunityInfo> communities,
                                                          bool weight_by_volume = false);

/// sum_i sum_j |m_i - m_j| / (2 * 24 * sum m). Throws DataError when all mass is zero.
double gini(std::span<const double, kHoursPerDay> mass);

struct GrowthCell {
    int year = 0;
    int offset_hours = 0;
    double log2_fold_change = 0.0;
};

/// log2((m[year, h] + eps) / (m[base, h] + eps)) on the 24 hour classes. Throws DataError without the base year.
std::vector<GrowthCell> growth_index(std::span<const YearlyOffsetDistribution> yearly, int base_year = 2012,
                                     double epsilon = 1e-9);

double pearson(std::span<const double> a, std::span<const double> b);
/// Pearson correlation of average ranks.
double spearman(std::span<const double> a, std::span<const double> b);

struct PopulationCorrelation {
    double pearson = 0.0;
    double spearman = 0.0;
};

PopulationCorrelation population_correlation(const HourVector& inferred, const HourVector& external);

/// External population CSV `offset_minutes,real_share` folded onto hour classes; missing classes are 0.
HourVector read_population(const std::filesystem::path& path);

/// Shifts -11..+12 h; weights[k] moves mass by shift_hours[k].
inline constexpr std::array<int, kHoursPerDay> kShiftHours = {-11, -10, -9, -8, -7, -6, -5, -4, -3, -2, -1, 0,
                                                             1,   2,   3,   4,   5,   6,   7,   8,   9,   10, 11, 12};

struct DeconvolutionResult {
    HourVector weights{};
    HourVector theta{};
    /// Redistributed distribution (shares summing to 1), indexed by hour class -11..+12.
    HourVector optimized{};
    /// 0.5 * ||optimized - real||^2 on shares.
    double objective = 0.0;
    bool converged = false;
    int iterations = 0;
    double pearson = 0.0;
    double spearman = 0.0;
    double sum_residual = 0.0;
    double barycenter_residual = 0.0;
};

struct DeconvolveOptions {
    int max_iterations = 500;
    double tolerance = 1e-12;
};

/// Circular convolution of `pure` with a kernel w over the 24 shifts, fitted to `real` by least
/// squares subject to w >= 0, sum w = 1 and sum w sin(theta) = 0. Inputs are normalized to shares.
DeconvolutionResult deconvolve(const HourVector& pure, const HourVector& real, const DeconvolveOptions& options = {});

/// Applies a kernel: out[j] = sum_k w[k] * in[j - shift_k].
HourVector redistribute(const HourVector& distribution, const HourVector& weights);

}  // namespace circtz
