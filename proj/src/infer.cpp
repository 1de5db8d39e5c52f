#include "circtz/infer.hpp"

#include "circtz/csv.hpp"

#include <algorithm>
#include <cmath>

namespace circtz {

const HourVector& PoolEntry::vector(FeatureKind kind) const {
    switch (kind) {
        case FeatureKind::Profile:
            return profile;
        case FeatureKind::SmoothedProfile:
            return smoothed;
        case FeatureKind::NormalizedPower:
            return power;
    }
    return profile;
}

HourVector normalize(const HourVector& v) {
    const double total = cyclic_sum(v);
    HourVector out{};
    if (!(total > 0.0)) {
        out.fill(1.0 / kHoursPerDay);
        return out;
    }
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
        out[h] = v[h] / total;
    }
    return out;
}

HourVector feature_vector(const CommunityFeatures& f, FeatureKind kind) {
    switch (kind) {
        case FeatureKind::Profile:
            return f.profile.p;
        case FeatureKind::SmoothedProfile:
            return normalize(f.smoothed.lambda);
        case FeatureKind::NormalizedPower:
            return normalize(f.rhythm.power);
    }
    return f.profile.p;
}

PoolEntry to_pool_entry(const CommunityFeatures& f) {
    if (!f.offset_minutes) {
        throw DataError("reference '" + f.community_id + "' has no ground-truth offset");
    }
    return PoolEntry{f.community_id, *f.offset_minutes, feature_vector(f, FeatureKind::Profile),
                     feature_vector(f, FeatureKind::SmoothedProfile), feature_vector(f, FeatureKind::NormalizedPower)};
}

ReferencePool ReferencePool::from_features(std::span<const CommunityFeatures> features) {
    std::vector<PoolEntry> entries;
    entries.reserve(features.size());
    for (const auto& f : features) {
        entries.push_back(to_pool_entry(f));
    }
    return from_entries(std::move(entries));
}

ReferencePool ReferencePool::from_entries(std::vector<PoolEntry> entries) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const PoolEntry& a, const PoolEntry& b) { return a.community_id < b.community_id; });
    ReferencePool pool;
    pool.entries_ = std::move(entries);
    return pool;
}

double anchor_offset_hours(double observed_hour, double lull_hour) {
    double r = std::fmod(lull_hour - observed_hour + 12.0, 24.0);
    if (r < 0) {
        r += 24.0;
    }
    double offset = r - 12.0;
    if (offset <= -12.0) {
        offset += 24.0;
    }
    return offset;
}

int anchor_offset_minutes(double observed_hour, double lull_hour) {
    // Whole-minute integer arithmetic keeps shifted inputs exactly shifted outputs.
    const long long observed = std::llround(observed_hour * 60.0);
    const long long lull = std::llround(lull_hour * 60.0);
    long long offset = wrap_minutes(lull - observed + 720) - 720;
    if (offset <= -720) {
        offset += kMinutesPerDay;
    }
    long long snapped = std::llround(static_cast<double>(offset) / 15.0) * 15;
    // snapping can push -711 onto -720, which is the same meridian as +720
    if (snapped <= -720) {
        snapped += kMinutesPerDay;
    }
    return static_cast<int>(snapped);
}

namespace {

// Terms are summed from `start` so that jointly rotated inputs give bit-identical results.
double kl_from(std::span<const double, kHoursPerDay> p, std::span<const double, kHoursPerDay> q, double epsilon,
               int start) {
    const double denom = 1.0 + kHoursPerDay * epsilon;
    double d = 0.0;
    for (int i = 0; i < kHoursPerDay; ++i) {
        const auto h = static_cast<std::size_t>((i + start) % kHoursPerDay);
        if (p[h] > 0.0) {
            const double qs = (q[h] + epsilon) / denom;
            d += p[h] * std::log(p[h] / qs);
        }
    }
    return d;
}

}  // namespace

double kl_divergence(std::span<const double, kHoursPerDay> p, std::span<const double, kHoursPerDay> q,
                     double epsilon) {
    return kl_from(p, q, epsilon, canonical_rotation(p));
}

OffsetPrediction nearest_reference(const HourVector& target, const ReferencePool& pool, FeatureKind kind,
                                   double epsilon) {
    if (pool.empty()) {
        throw DataError("reference pool is empty");
    }
    const int start = canonical_rotation(target);
    const PoolEntry* best = nullptr;
    double best_d = 0.0;
    for (const auto& entry : pool.entries()) {
        const double d = kl_from(target, entry.vector(kind), epsilon, start);
        if (best == nullptr || d < best_d || (d == best_d && entry.community_id < best->community_id)) {
            best = &entry;
            best_d = d;
        }
    }
    OffsetPrediction out;
    out.offset_minutes = best->offset_minutes;
    out.matched_ref = best->community_id;
    out.divergence = best_d;
    return out;
}

OffsetPrediction run_method(Method method, const CommunityFeatures& target, const ReferencePool* pool,
                            const InferConfig& config) {
    OffsetPrediction out;
    auto anchor = [&](double observed) {
        out.offset_minutes = anchor_offset_minutes(observed, config.lull_hour);
        out.lull_hour = observed;
    };
    auto reference = [&](FeatureKind kind) {
        if (pool == nullptr) {
            throw DataError(std::string(method_name(method)) + " needs a reference pool");
        }
        out = nearest_reference(feature_vector(target, kind), *pool, kind, config.kl_epsilon);
    };
    switch (method) {
        case Method::ActivityLull:
            anchor(target.scalars.h_min);
            break;
        case Method::ActivityLullSmooth:
            anchor(target.scalars.h_smooth_min);
            break;
        case Method::MostStableRhythm:
            anchor(target.scalars.h_stable_phase);
            break;
        case Method::ActivityCounts:
            reference(FeatureKind::Profile);
            break;
        case Method::ActivityCountsSmooth:
            reference(FeatureKind::SmoothedProfile);
            break;
        case Method::Rhythm:
            reference(FeatureKind::NormalizedPower);
            break;
    }
    out.community_id = target.community_id;
    out.method = method;
    return out;
}

void write_predictions(const std::filesystem::path& path, std::span<const OffsetPrediction> predictions) {
    csv::Writer w(path);
    w.row({"community_id", "method", "offset_minutes", "matched_ref", "divergence", "lull_hour"});
    for (const auto& p : predictions) {
        w.row({p.community_id, std::string(method_name(p.method)), std::to_string(p.offset_minutes),
               p.matched_ref.value_or(""), p.divergence ? csv::format_double(*p.divergence) : "",
               p.lull_hour ? csv::format_double(*p.lull_hour) : ""});
    }
    w.close();
}

std::vector<OffsetPrediction> read_predictions(const std::filesystem::path& path) {
    const auto table = csv::read_table(path);
    const auto id = table.column("community_id", path);
    const auto method = table.column("method", path);
    const auto offset = table.column("offset_minutes", path);
    const auto ref = table.find_column("matched_ref");
    const auto div = table.find_column("divergence");
    const auto lull = table.find_column("lull_hour");
    std::vector<OffsetPrediction> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        try {
            OffsetPrediction p;
            p.community_id = row[id];
            try {
                p.method = parse_method(row[method]);
            } catch (const UsageError& e) {
                throw DataError(e.what());
            }
            p.offset_minutes = static_cast<int>(csv::parse_int(row[offset], "offset_minutes"));
            if (ref && !row[*ref].empty()) {
                p.matched_ref = row[*ref];
            }
            if (div && !row[*div].empty()) {
                p.divergence = csv::parse_double(row[*div], "divergence");
            }
            if (lull && !row[*lull].empty()) {
                p.lull_hour = csv::parse_double(row[*lull], "lull_hour");
            }
            out.push_back(std::move(p));
        } catch (const DataError& e) {
            throw DataError(path.string() + ":" + std::to_string(table.line_numbers[r]) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace circtz
