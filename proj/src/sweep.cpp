#include "circtz/batch.hpp"
#include "circtz/csv.hpp"
#include "circtz/eval.hpp"
#include "circtz/rng.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

namespace circtz {

SweepAxis parse_axis(std::string_view name) {
    if (name == "comments") {
        return SweepAxis::Comments;
    }
    if (name == "days") {
        return SweepAxis::Days;
    }
    throw UsageError("unknown sweep axis '" + std::string(name) + "'; expected comments or days");
}

std::string_view axis_name(SweepAxis axis) { return axis == SweepAxis::Comments ? "comments" : "days"; }

ActivitySeries subsample_events(const ActivitySeries& raw, std::size_t events, std::uint64_t seed) {
    std::vector<std::uint32_t> hours;
    for (std::size_t t = 0; t < raw.counts.size(); ++t) {
        const auto c = static_cast<std::size_t>(std::llround(raw.counts[t]));
        hours.insert(hours.end(), c, static_cast<std::uint32_t>(t));
    }
    if (events >= hours.size()) {
        return raw;
    }
    Rng rng(seed);
    // Partial Fisher-Yates: the first `events` slots are a uniform sample without replacement.
    for (std::size_t i = 0; i < events; ++i) {
        std::swap(hours[i], hours[i + uniform_index(rng, hours.size() - i)]);
    }
    ActivitySeries out;
    out.start_hour = raw.start_hour;
    out.counts.assign(raw.counts.size(), 0.0);
    for (std::size_t i = 0; i < events; ++i) {
        out.counts[hours[i]] += 1.0;
    }
    return out;
}

ActivitySeries trailing_days(const ActivitySeries& raw, std::size_t days) {
    const std::size_t keep = days * kHoursPerDay;
    if (keep >= raw.counts.size()) {
        return raw;
    }
    ActivitySeries out;
    const std::size_t drop = raw.counts.size() - keep;
    out.start_hour = raw.start_hour + static_cast<std::int64_t>(drop);
    out.counts.assign(raw.counts.begin() + static_cast<std::ptrdiff_t>(drop), raw.counts.end());
    return out;
}

namespace {

std::vector<CommunityFeatures> keep_evaluable(std::vector<CommunityFeatures> features, std::string& flags) {
    std::map<int, std::size_t> sizes;
    for (const auto& f : features) {
        ++sizes[*f.offset_minutes];
    }
    const auto before = features.size();
    std::erase_if(features, [&](const CommunityFeatures& f) { return sizes[*f.offset_minutes] < 2; });
    if (features.size() != before) {
        flags += flags.empty() ? "" : ";";
        flags += "dropped_singleton_classes:" + std::to_string(before - features.size());
    }
    return features;
}

}  // namespace

std::vector<SweepRow> scarcity_sweep(const LabeledCorpus& corpus, std::span<const Method> methods,
                                     const SweepOptions& options) {
    options.plan.validate();
    if (!std::is_sorted(options.levels.begin(), options.levels.end(), std::greater<>())) {
        throw UsageError("sweep levels must be sorted in descending order");
    }
    const auto offsets = offsets_by_id(corpus.labels);
    SeriesMap labeled;
    for (const auto& l : corpus.labels) {
        labeled.emplace(l.community_id, corpus.series.at(l.community_id));
    }

    std::vector<SweepRow> rows;
    for (double level : options.levels) {
        if (!(level >= 1.0)) {
            throw UsageError("sweep levels must be >= 1");
        }
        const auto n = static_cast<std::size_t>(std::llround(level));
        std::size_t clamped = 0;
        for (const auto& [id, s] : labeled) {
            const double available = options.axis == SweepAxis::Comments
                                         ? s.total()
                                         : static_cast<double>(s.size()) / kHoursPerDay;
            clamped += static_cast<double>(n) >= available ? 1 : 0;
        }

        std::optional<FeatureBatch> shared;  // iteration-independent subsample
        for (int it = 0; it < options.plan.iterations; ++it) {
            const FeatureBatch* batch = nullptr;
            FeatureBatch local;
            if (options.axis == SweepAxis::Days || clamped == labeled.size()) {
                if (!shared) {
                    SeriesMap sub;
                    for (const auto& [id, s] : labeled) {
                        sub.emplace(id, options.axis == SweepAxis::Days ? trailing_days(s, n) : s);
                    }
                    shared = compute_batch(sub, offsets, options.features, options.jobs, true);
                }
                batch = &*shared;
            } else {
                SeriesMap sub;
                for (const auto& [id, s] : labeled) {
                    std::uint64_t seed = derive_seed(options.plan.seed, "sweep");
                    seed = derive_seed(seed, id);
                    seed = derive_seed(seed, static_cast<std::uint64_t>(n));
                    seed = derive_seed(seed, static_cast<std::uint64_t>(it));
                    sub.emplace(id, subsample_events(s, n, seed));
                }
                local = compute_batch(sub, offsets, options.features, options.jobs, true);
                batch = &local;
            }

            std::string flags;
            if (clamped > 0) {
                flags = "clamped:" + std::to_string(clamped);
            }
            if (!batch->excluded.empty()) {
                flags += flags.empty() ? "" : ";";
                flags += "excluded:" + std::to_string(batch->excluded.size());
            }
            auto usable = keep_evaluable(batch->features, flags);
            if (usable.empty()) {
                spdlog::warn("sweep {}={}: no evaluable communities", axis_name(options.axis), level);
                for (Method m : methods) {
                    rows.push_back({std::string(method_name(m)), options.axis, level, it, std::nan(""), std::nan(""), 0,
                                    flags + (flags.empty() ? "" : ";") + "no_data"});
                }
                continue;
            }
            const auto results = evaluate_iteration(usable, methods, options.plan, it, options.infer, nullptr, nullptr);
            for (const auto& r : results) {
                rows.push_back({r.method, options.axis, level, it, r.metrics.circular_correlation, r.metrics.accuracy,
                                usable.size(), flags});
            }
        }
    }
    return rows;
}

void write_sweep(const std::filesystem::path& path, std::span<const SweepRow> rows) {
    csv::Writer w(path);
    w.row({"method", "axis", "level", "iteration", "rho", "accuracy", "n_communities", "flags"});
    for (const auto& r : rows) {
        w.row({r.method, std::string(axis_name(r.axis)), csv::format_double(r.level), std::to_string(r.iteration),
               csv::format_double(r.rho), csv::format_double(r.accuracy), std::to_string(r.n_communities), r.flags});
    }
    w.close();
}

}  // namespace circtz
