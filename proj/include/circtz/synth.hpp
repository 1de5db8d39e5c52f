#pragma once

#include "circtz/ingest.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace circtz {

enum class Trend { None, LinearGrowth, Spike };

/// One synthetic community. Local-time intensity is exp(concentration * cos(2 pi (h - peak) / 24)),
/// rescaled so the trough (at trough_hour_local) sits at (1 - trough_depth) of the peak.
struct SynthSpec {
    std::string community_id = "synthetic";
    int offset_minutes = 0;
    int n_days = 180;
    double mean_daily_events = 200.0;
    double trough_hour_local = 4.0;
    double trough_depth = 0.8;
    double concentration = 1.0;
    Trend trend = Trend::None;
    /// Standard deviation (radians) of a per-local-day phase shift of the daily curve.
    double phase_jitter_rad = 0.0;
    /// Standard deviation of a per-local-day log-normal volume factor (mean 1).
    double daily_volume_sigma = 0.0;
    /// Second population for mixture communities: (offset_minutes, weight in [0, 1]).
    std::optional<std::pair<int, double>> mixture;
    std::int64_t start_hour = 438288;  // 2020-01-01T00:00Z
    std::uint64_t seed = 0;

    void validate() const;
};

/// Expected count per hour of day (UTC hour index 0..23) for the clean daily curve.
std::vector<double> expected_hourly_intensity(const SynthSpec& spec);

std::pair<ActivitySeries, GroundTruthLabel> generate(const SynthSpec& spec);

struct CorpusSpec {
    std::vector<int> offsets_minutes;
    int per_class = 4;
    /// Optional per-offset member counts (same length as offsets_minutes); overrides per_class.
    std::vector<int> class_sizes;
    SynthSpec base;
    std::uint64_t seed = 0;
    /// Start dates are spread uniformly over these years.
    int first_year = 2012;
    int last_year = 2024;
};

/// 24 integer offsets (-11..+12 h), 4 communities each, 180 days at 200 events/day, trough depth 1.
CorpusSpec default_corpus_spec(std::uint64_t seed);

/// Same communities as the default corpus but with class sizes 2 + round(40 * share) following a
/// platform-like offset distribution (heavy on UTC-5/-6 and UTC+0/+1), so circular means are defined.
CorpusSpec skewed_corpus_spec(std::uint64_t seed);

LabeledCorpus generate_corpus(const CorpusSpec& spec);

/// Rebuilds events from hourly counts: each event gets a uniform second inside its hour.
/// `.ndjson` / `.jsonl` → NDJSON, `.csv` → community,created_utc; a trailing `.gz` compresses.
void write_events(const std::filesystem::path& path, const SeriesMap& series, std::uint64_t seed);

/// Reads either a single SynthSpec object or a corpus object {"offsets": [...], "per_class", "base", "seed", ...}.
CorpusSpec read_corpus_spec(const std::filesystem::path& path);
std::string trend_name(Trend t);
Trend parse_trend(const std::string& name);

}  // namespace circtz
