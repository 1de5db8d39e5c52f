#pragma once

#include "circtz/features.hpp"
#include "circtz/ingest.hpp"

#include <map>
#include <string>
#include <vector>

namespace circtz {

struct Exclusion {
    std::string community_id;
    std::string reason;
};

struct FeatureBatch {
    std::vector<CommunityFeatures> features;  // sorted by community id
    std::vector<Exclusion> excluded;
};

/// Features for every series that passes the sparsity filter and is long enough for the
/// wavelet. Offsets are attached from `offsets` when present; with `labeled_only` the
/// unlabeled series are skipped.
FeatureBatch compute_batch(const SeriesMap& series, const std::map<std::string, int>& offsets,
                           const FeatureConfig& config, int jobs, bool labeled_only = false);

std::map<std::string, int> offsets_by_id(const std::vector<GroundTruthLabel>& labels);

}  // namespace circtz
