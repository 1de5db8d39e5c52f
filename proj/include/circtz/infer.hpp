#pragma once

#include "circtz/common.hpp"
#include "circtz/features.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace circtz {

enum class FeatureKind { Profile, SmoothedProfile, NormalizedPower };

/// One labeled reference; all three vectors are on the probability simplex.
struct PoolEntry {
    std::string community_id;
    int offset_minutes = 0;
    HourVector profile{};
    HourVector smoothed{};
    HourVector power{};

    const HourVector& vector(FeatureKind kind) const;
};

/// Immutable set of labeled references, ordered by community id.
class ReferencePool {
public:
    ReferencePool() = default;
    /// Every feature row must carry an offset; throws DataError otherwise.
    static ReferencePool from_features(std::span<const CommunityFeatures> features);
    static ReferencePool from_entries(std::vector<PoolEntry> entries);

    std::span<const PoolEntry> entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

private:
    std::vector<PoolEntry> entries_;
};

struct OffsetPrediction {
    std::string community_id;
    Method method = Method::ActivityCounts;
    int offset_minutes = 0;
    std::optional<std::string> matched_ref;
    std::optional<double> divergence;
    /// Observed UTC lull (or most stable) hour used by the anchor methods.
    std::optional<double> lull_hour;
};

struct InferConfig {
    double lull_hour = 4.0;
    double kl_epsilon = 1e-9;
};

/// ((lull - observed + 12) mod 24) - 12 in hours, mapped into (-12, 12].
double anchor_offset_hours(double observed_hour, double lull_hour = 4.0);
/// Same offset in minutes, snapped to the 15 minute grid (half away from zero).
int anchor_offset_minutes(double observed_hour, double lull_hour = 4.0);

/// sum p ln(p / q) with q smoothed to (q + eps) / (1 + 24 eps); 0 ln 0 = 0.
double kl_divergence(std::span<const double, kHoursPerDay> p, std::span<const double, kHoursPerDay> q,
                     double epsilon = 1e-9);

/// Scales to unit sum; a vector with no mass becomes uniform.
HourVector normalize(const HourVector& v);

/// Feature vector of a community as the pool would store it.
HourVector feature_vector(const CommunityFeatures& f, FeatureKind kind);
PoolEntry to_pool_entry(const CommunityFeatures& f);

/// argmin over the pool of D_KL(target || reference); ties go to the smaller divergence, then the smaller id.
OffsetPrediction nearest_reference(const HourVector& target, const ReferencePool& pool, FeatureKind kind,
                                   double epsilon = 1e-9);

/// Dispatches one of the six methods. Reference methods need a pool and throw DataError without one.
OffsetPrediction run_method(Method method, const CommunityFeatures& target, const ReferencePool* pool,
                            const InferConfig& config = {});

/// CSV `community_id,method,offset_minutes,matched_ref,divergence,lull_hour`.
void write_predictions(const std::filesystem::path& path, std::span<const OffsetPrediction> predictions);
std::vector<OffsetPrediction> read_predictions(const std::filesystem::path& path);

}  // namespace circtz
