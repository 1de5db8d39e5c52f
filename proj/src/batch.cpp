#include "circtz/batch.hpp"

#include "circtz/parallel.hpp"

#include <optional>

namespace circtz {

std::map<std::string, int> offsets_by_id(const std::vector<GroundTruthLabel>& labels) {
    std::map<std::string, int> out;
    for (const auto& l : labels) {
        out.emplace(l.community_id, l.offset_minutes);
    }
    return out;
}

FeatureBatch compute_batch(const SeriesMap& series, const std::map<std::string, int>& offsets,
                           const FeatureConfig& config, int jobs, bool labeled_only) {
    config.detrend.validate();
    std::vector<const std::pair<const std::string, ActivitySeries>*> items;
    for (const auto& item : series) {
        if (!labeled_only || offsets.contains(item.first)) {
            items.push_back(&item);
        }
    }
    std::vector<std::optional<CommunityFeatures>> slots(items.size());
    std::vector<std::string> reasons(items.size());
    parallel_for(items.size(), jobs, [&](std::size_t i) {
        const auto& [id, raw] = *items[i];
        if (!sparsity_filter(raw, config.detrend.min_nonzero)) {
            reasons[i] = "fewer than " + std::to_string(config.detrend.min_nonzero) + " non-zero hours";
            return;
        }
        if (raw.size() < cwt_min_length(config.cwt)) {
            reasons[i] = "insufficient span: " + std::to_string(raw.size()) + " hours";
            return;
        }
        auto f = compute_features(id, raw, config);
        if (auto it = offsets.find(id); it != offsets.end()) {
            f.offset_minutes = it->second;
        }
        slots[i] = std::move(f);
    });
    FeatureBatch batch;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (slots[i]) {
            batch.features.push_back(std::move(*slots[i]));
        } else {
            batch.excluded.push_back({items[i]->first, reasons[i]});
        }
    }
    return batch;
}

}  // namespace circtz
