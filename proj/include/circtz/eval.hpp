#pragma once

#include "circtz/common.hpp"
#include "circtz/features.hpp"
#include "circtz/infer.hpp"
#include "circtz/ingest.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace circtz {

// ---------------------------------------------------------------------------
// Metrics. Offsets enter in minutes; circular quantities are computed in hours.

/// Shortest distance on the 24 h clock, in [0, 12].
double circular_error_hours(double y_hours, double yhat_hours);

/// Circular mean of angles (radians).
double circular_mean(std::span<const double> angles);

/// |mean of e^{i a}|, in [0, 1].
double mean_resultant_length(std::span<const double> angles);

/// Jammalamadaka-SenGupta circular correlation of two hour series (angles = hours * 2 pi / 24).
/// NaN when either side has no mean direction (resultant below 1e-9) or no spread around it.
double circular_correlation(std::span<const double> y_hours, std::span<const double> yhat_hours);

using ConfusionMatrix = std::array<std::array<std::size_t, kHoursPerDay>, kHoursPerDay>;

/// Rows = truth, columns = prediction; categories are hour classes -11..+12 in order.
ConfusionMatrix confusion_matrix(std::span<const int> truth_minutes, std::span<const int> pred_minutes);

/// Linear-weight Cohen's kappa with the 24 hour classes as ordered categories. NaN if degenerate.
double weighted_kappa(std::span<const int> truth_minutes, std::span<const int> pred_minutes);

/// Support-weighted F1 over integer hour classes. Classes never predicted score precision 0.
double weighted_f1(std::span<const int> truth_minutes, std::span<const int> pred_minutes);

/// Exact match rate (offsets compared modulo 24 h).
double accuracy(std::span<const int> truth_minutes, std::span<const int> pred_minutes);

struct Metrics {
    double accuracy = 0.0;
    double weighted_kappa = 0.0;
    double circular_correlation = 0.0;
    double mean_circular_error = 0.0;
    double weighted_f1 = 0.0;
    std::size_t n = 0;
    /// Non-empty when some metric was undefined (e.g. "kappa_undefined;rho_undefined").
    std::string flags;
};

Metrics score(std::span<const int> truth_minutes, std::span<const int> pred_minutes);

// ---------------------------------------------------------------------------
// Baseline and cross-validation.

/// i.i.d. draws from the reference-side class frequencies.
std::vector<int> dummy_baseline(std::span<const int> reference_offsets, std::size_t n_targets, std::uint64_t seed);

struct SplitPlan {
    int iterations = 10;
    double reference_fraction = 0.2;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Split {
    std::vector<std::size_t> reference;
    std::vector<std::size_t> targets;
};

/// Per offset class of size n: round(fraction * n) references, clamped to [1, n - 1].
/// `offsets` is indexed like the corpus; throws DataError for classes with fewer than 2 members.
Split stratified_split(std::span<const int> offsets, double reference_fraction, std::uint64_t seed);

inline constexpr std::string_view kDummyName = "Dummy";

struct MethodIteration {
    std::string method;
    int iteration = 0;
    Metrics metrics;
};

struct TargetOutcome {
    int iteration = 0;
    std::string method;
    std::string community_id;
    int truth_minutes = 0;
    int predicted_minutes = 0;
    double error_hours = 0.0;
};

struct EvalReport {
    std::vector<std::string> methods;  // evaluated methods, then "Dummy"
    std::vector<MethodIteration> iterations;
    std::vector<MethodIteration> aggregates;  // unweighted mean over iterations, iteration = -1
    std::map<std::string, ConfusionMatrix> confusion;  // summed over iterations
    std::vector<TargetOutcome> outcomes;

    const Metrics& aggregate(std::string_view method) const;
};

/// One split of the repeated stratified protocol; `features` must all carry offsets.
std::vector<MethodIteration> evaluate_iteration(std::span<const CommunityFeatures> features,
                                                std::span<const Method> methods, const SplitPlan& plan, int iteration,
                                                const InferConfig& config, std::vector<TargetOutcome>* outcomes,
                                                std::map<std::string, ConfusionMatrix>* confusion);

EvalReport run_cv(std::span<const CommunityFeatures> features, std::span<const Method> methods, const SplitPlan& plan,
                  const InferConfig& config = {});

void write_report(const std::filesystem::path& path, const EvalReport& report);
void write_confusion(const std::filesystem::path& dir, const EvalReport& report);
void write_outcomes(const std::filesystem::path& path, const EvalReport& report);

// ---------------------------------------------------------------------------
// Data-scarcity sweeps.

enum class SweepAxis { Comments, Days };
SweepAxis parse_axis(std::string_view name);
std::string_view axis_name(SweepAxis axis);

struct SweepRow {
    std::string method;
    SweepAxis axis = SweepAxis::Comments;
    double level = 0;
    int iteration = 0;
    double rho = 0.0;
    double accuracy = 0.0;
    std::size_t n_communities = 0;
    std::string flags;
};

/// Uniform subsample of `events` whole events over the same span (clamped when larger than the total).
ActivitySeries subsample_events(const ActivitySeries& raw, std::size_t events, std::uint64_t seed);
/// The trailing `days` * 24 hours (clamped to the series).
ActivitySeries trailing_days(const ActivitySeries& raw, std::size_t days);

struct SweepOptions {
    SweepAxis axis = SweepAxis::Comments;
    std::vector<double> levels;  // sorted descending
    SplitPlan plan;
    FeatureConfig features;
    InferConfig infer;
    int jobs = 1;
};

std::vector<SweepRow> scarcity_sweep(const LabeledCorpus& corpus, std::span<const Method> methods,
                                     const SweepOptions& options);

void write_sweep(const std::filesystem::path& path, std::span<const SweepRow> rows);

}  // namespace circtz
