#pragma once

#include "circtz/preprocess.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace circtz {

struct Event {
    std::string community_id;
    std::int64_t timestamp_utc = 0;
};

struct GroundTruthLabel {
    std::string community_id;
    int offset_minutes = 0;
    std::optional<std::string> zone_name;

    bool operator==(const GroundTruthLabel&) const = default;
};

/// Keyed by community id; std::map keeps every downstream iteration in canonical sorted order.
using SeriesMap = std::map<std::string, ActivitySeries>;

struct RecordError {
    std::size_t line = 0;
    std::string message;
};

struct BinnedEvents {
    SeriesMap series;
    std::vector<RecordError> errors;
    std::size_t accepted = 0;
};

inline std::int64_t epoch_hour_of(std::int64_t unix_seconds) {
    // floor division; timestamps are validated non-negative anyway
    return unix_seconds >= 0 ? unix_seconds / 3600 : -((-unix_seconds + 3599) / 3600);
}

/// Each series spans its first to last active hour, gap hours hold 0.
SeriesMap bin_events(std::span<const Event> events);

/// Streams NDJSON ({"community": str, "created_utc": int}) or CSV (community,created_utc)
/// events, optionally gzip-compressed. Malformed records are reported by line and skipped.
BinnedEvents bin_event_file(const std::filesystem::path& path);

/// Pre-binned CSV `community,epoch_hour,count`. Overlapping rows (within or across
/// files) are summed. The span runs from the first to the last row present.
SeriesMap load_prebinned(std::span<const std::filesystem::path> paths);
SeriesMap load_prebinned(const std::filesystem::path& path);

/// Picks load_prebinned or bin_event_file from the file's first line.
SeriesMap load_series(const std::filesystem::path& path);

/// Writes the pre-binned format: every non-zero hour plus both span endpoints.
void write_prebinned(const std::filesystem::path& path, const SeriesMap& series);

/// Drops offset classes with fewer than `min_class_size` members. Idempotent.
std::vector<GroundTruthLabel> filter_small_classes(std::vector<GroundTruthLabel> labels, std::size_t min_class_size);

/// CSV `community_id,offset_minutes[,zone_name]` with header. Duplicate ids and
/// offsets off the 15 minute grid or outside [-720, 840] are hard errors.
std::vector<GroundTruthLabel> load_ground_truth(const std::filesystem::path& path, std::size_t min_class_size = 2);

void write_ground_truth(const std::filesystem::path& path, std::span<const GroundTruthLabel> labels);

struct LabeledCorpus {
    std::vector<GroundTruthLabel> labels;
    SeriesMap series;
};

/// Keeps labels that have a series, then re-applies the class-size filter.
LabeledCorpus make_corpus(std::vector<GroundTruthLabel> labels, SeriesMap series, std::size_t min_class_size = 2);

/// Calendar year (UTC) of an epoch hour.
int year_of_epoch_hour(std::int64_t epoch_hour);
/// Epoch hour of Jan 1 00:00 UTC of `year`.
std::int64_t epoch_hour_of_year(int year);

}  // namespace circtz
