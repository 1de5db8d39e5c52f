#include "circtz/ingest.hpp"

#include "circtz/common.hpp"
#include "circtz/csv.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <set>
#include <unordered_map>

namespace circtz {
namespace {

using HourBag = std::unordered_map<std::string, std::vector<std::int64_t>>;

SeriesMap series_from_hours(HourBag& bag) {
    SeriesMap out;
    for (auto& [id, hours] : bag) {
        std::sort(hours.begin(), hours.end());
        ActivitySeries s;
        s.start_hour = hours.front();
        s.counts.assign(static_cast<std::size_t>(hours.back() - hours.front() + 1), 0.0);
        for (std::int64_t h : hours) {
            s.counts[static_cast<std::size_t>(h - s.start_hour)] += 1.0;
        }
        out.emplace(id, std::move(s));
    }
    return out;
}

bool parse_event_line(const std::string& line, bool ndjson, Event& ev, std::string& error) {
    if (ndjson) {
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            error = "invalid JSON";
            return false;
        }
        auto c = j.find("community");
        auto t = j.find("created_utc");
        if (c == j.end() || !c->is_string()) {
            error = "missing string field 'community'";
            return false;
        }
        if (t == j.end() || !t->is_number_integer()) {
            error = "missing integer field 'created_utc'";
            return false;
        }
        ev.community_id = c->get<std::string>();
        ev.timestamp_utc = t->get<std::int64_t>();
    } else {
        auto fields = csv::split_line(line);
        if (fields.size() != 2) {
            error = "expected 2 fields (community,created_utc)";
            return false;
        }
        try {
            ev.timestamp_utc = csv::parse_int(fields[1], "created_utc");
        } catch (const DataError& e) {
            error = e.what();
            return false;
        }
        ev.community_id = std::move(fields[0]);
    }
    if (ev.community_id.empty()) {
        error = "empty community id";
        return false;
    }
    if (ev.timestamp_utc < 0) {
        error = "negative timestamp";
        return false;
    }
    return true;
}

}  // namespace

SeriesMap bin_events(std::span<const Event> events) {
    HourBag bag;
    for (const Event& ev : events) {
        bag[ev.community_id].push_back(epoch_hour_of(ev.timestamp_utc));
    }
    return series_from_hours(bag);
}

BinnedEvents bin_event_file(const std::filesystem::path& path) {
    csv::LineReader reader(path);
    BinnedEvents result;
    HourBag bag;
    std::optional<bool> ndjson;
    Event ev;
    while (auto line = reader.next()) {
        if (line->empty()) {
            continue;
        }
        if (!ndjson) {
            ndjson = line->front() == '{';
            if (!*ndjson && line->rfind("community", 0) == 0) {
                continue;  // CSV header
            }
        }
        std::string error;
        if (!parse_event_line(*line, *ndjson, ev, error)) {
            result.errors.push_back({reader.line_number(), error});
            continue;
        }
        bag[ev.community_id].push_back(epoch_hour_of(ev.timestamp_utc));
        ++result.accepted;
    }
    for (const auto& err : result.errors) {
        spdlog::warn("{}:{}: skipped record: {}", path.string(), err.line, err.message);
    }
    result.series = series_from_hours(bag);
    return result;
}

SeriesMap load_prebinned(std::span<const std::filesystem::path> paths) {
    std::unordered_map<std::string, std::map<std::int64_t, double>> rows;
    for (const auto& path : paths) {
        csv::LineReader reader(path);
        bool header_seen = false;
        std::unordered_map<std::string, std::int64_t> last_hour;
        std::set<std::string> reordered;
        while (auto line = reader.next()) {
            if (line->empty()) {
                continue;
            }
            auto fields = csv::split_line(*line);
            if (!header_seen) {
                header_seen = true;
                if (fields.size() != 3 || fields[0] != "community" || fields[1] != "epoch_hour" || fields[2] != "count") {
                    throw DataError(path.string() + ":1: expected header community,epoch_hour,count");
                }
                continue;
            }
            const std::string where = path.string() + ":" + std::to_string(reader.line_number());
            if (fields.size() != 3) {
                throw DataError(where + ": expected 3 fields");
            }
            if (fields[0].empty()) {
                throw DataError(where + ": empty community id");
            }
            std::int64_t hour = 0;
            double count = 0;
            try {
                hour = csv::parse_int(fields[1], "epoch_hour");
                count = csv::parse_double(fields[2], "count");
            } catch (const DataError& e) {
                throw DataError(where + ": " + e.what());
            }
            if (!(count >= 0.0)) {
                throw DataError(where + ": negative count " + fields[2]);
            }
            auto [it, fresh] = last_hour.try_emplace(fields[0], hour);
            if (!fresh) {
                if (hour < it->second) {
                    reordered.insert(fields[0]);
                }
                it->second = hour;
            }
            rows[fields[0]][hour] += count;
        }
        for (const auto& id : reordered) {
            spdlog::info("{}: rows for '{}' were not in hour order; reordered", path.string(), id);
        }
    }
    SeriesMap out;
    for (auto& [id, hours] : rows) {
        ActivitySeries s;
        s.start_hour = hours.begin()->first;
        s.counts.assign(static_cast<std::size_t>(hours.rbegin()->first - s.start_hour + 1), 0.0);
        for (const auto& [h, c] : hours) {
            s.counts[static_cast<std::size_t>(h - s.start_hour)] = c;
        }
        out.emplace(id, std::move(s));
    }
    return out;
}

SeriesMap load_prebinned(const std::filesystem::path& path) {
    return load_prebinned(std::span<const std::filesystem::path>(&path, 1));
}

SeriesMap load_series(const std::filesystem::path& path) {
    std::string first;
    {
        csv::LineReader reader(path);
        while (auto line = reader.next()) {
            if (!line->empty()) {
                first = *line;
                break;
            }
        }
    }
    if (first.rfind("community,epoch_hour", 0) == 0) {
        return load_prebinned(path);
    }
    auto binned = bin_event_file(path);
    if (binned.series.empty() && !binned.errors.empty()) {
        throw DataError(path.string() + ": no valid events (" + std::to_string(binned.errors.size()) +
                        " malformed records)");
    }
    return std::move(binned.series);
}

void write_prebinned(const std::filesystem::path& path, const SeriesMap& series) {
    csv::Writer w(path);
    w.row({"community", "epoch_hour", "count"});
    for (const auto& [id, s] : series) {
        for (std::size_t i = 0; i < s.counts.size(); ++i) {
            if (s.counts[i] != 0.0 || i == 0 || i + 1 == s.counts.size()) {
                w.row({id, std::to_string(s.start_hour + static_cast<std::int64_t>(i)), csv::format_double(s.counts[i])});
            }
        }
    }
    w.close();
}

std::vector<GroundTruthLabel> filter_small_classes(std::vector<GroundTruthLabel> labels, std::size_t min_class_size) {
    std::map<int, std::size_t> sizes;
    for (const auto& l : labels) {
        ++sizes[l.offset_minutes];
    }
    std::size_t dropped_classes = 0;
    std::size_t dropped_labels = 0;
    for (const auto& [offset, n] : sizes) {
        if (n < min_class_size) {
            ++dropped_classes;
            dropped_labels += n;
        }
    }
    if (dropped_classes > 0) {
        spdlog::info("ground truth: dropped {} offset class(es) with fewer than {} members ({} label(s))",
                     dropped_classes, min_class_size, dropped_labels);
    }
    std::erase_if(labels, [&](const GroundTruthLabel& l) { return sizes[l.offset_minutes] < min_class_size; });
    return labels;
}

std::vector<GroundTruthLabel> load_ground_truth(const std::filesystem::path& path, std::size_t min_class_size) {
    const auto table = csv::read_table(path);
    if (table.header.empty()) {
        spdlog::warn("{}: empty ground-truth file", path.string());
        return {};
    }
    const auto id_col = table.column("community_id", path);
    const auto off_col = table.column("offset_minutes", path);
    const auto zone_col = table.find_column("zone_name");

    std::vector<GroundTruthLabel> labels;
    std::set<std::string> seen;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string where = path.string() + ":" + std::to_string(table.line_numbers[r]);
        GroundTruthLabel label;
        label.community_id = row[id_col];
        if (label.community_id.empty()) {
            throw DataError(where + ": empty community_id");
        }
        std::int64_t offset = 0;
        try {
            offset = csv::parse_int(row[off_col], "offset_minutes");
        } catch (const DataError& e) {
            throw DataError(where + ": " + e.what());
        }
        if (offset % 15 != 0) {
            throw DataError(where + ": offset_minutes " + row[off_col] + " is not a multiple of 15");
        }
        if (offset < kMinOffsetMinutes || offset > kMaxOffsetMinutes) {
            throw DataError(where + ": offset_minutes " + row[off_col] + " outside [-720, 840]");
        }
        label.offset_minutes = static_cast<int>(offset);
        if (zone_col && !row[*zone_col].empty()) {
            label.zone_name = row[*zone_col];
        }
        if (!seen.insert(label.community_id).second) {
            throw DataError(where + ": duplicate community_id '" + label.community_id + "'");
        }
        labels.push_back(std::move(label));
    }
    if (labels.empty()) {
        spdlog::warn("{}: ground-truth file has no labels", path.string());
    }
    return filter_small_classes(std::move(labels), min_class_size);
}

void write_ground_truth(const std::filesystem::path& path, std::span<const GroundTruthLabel> labels) {
    csv::Writer w(path);
    w.row({"community_id", "offset_minutes", "zone_name"});
    for (const auto& l : labels) {
        w.row({l.community_id, std::to_string(l.offset_minutes), l.zone_name.value_or("")});
    }
    w.close();
}

LabeledCorpus make_corpus(std::vector<GroundTruthLabel> labels, SeriesMap series, std::size_t min_class_size) {
    const auto before = labels.size();
    std::erase_if(labels, [&](const GroundTruthLabel& l) { return !series.contains(l.community_id); });
    if (labels.size() != before) {
        spdlog::warn("corpus: {} label(s) have no activity series and were dropped", before - labels.size());
    }
    labels = filter_small_classes(std::move(labels), min_class_size);
    std::sort(labels.begin(), labels.end(),
              [](const GroundTruthLabel& a, const GroundTruthLabel& b) { return a.community_id < b.community_id; });
    return LabeledCorpus{std::move(labels), std::move(series)};
}

int year_of_epoch_hour(std::int64_t epoch_hour) {
    using namespace std::chrono;
    const sys_days day{days{epoch_hour >= 0 ? epoch_hour / 24 : -((-epoch_hour + 23) / 24)}};
    return static_cast<int>(year_month_day{day}.year());
}

std::int64_t epoch_hour_of_year(int year) {
    using namespace std::chrono;
    const sys_days day{std::chrono::year{year} / January / 1};
    return static_cast<std::int64_t>(day.time_since_epoch().count()) * 24;
}

}  // namespace circtz
