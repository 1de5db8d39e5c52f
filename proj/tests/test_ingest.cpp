#include "doctest.h"
#include "support.hpp"

#include "circtz/ingest.hpp"
#include "circtz/synth.hpp"

#include <fstream>

using namespace circtz;

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("bin_events floors timestamps to hours and zero-fills gaps") {
    std::vector<Event> events = {
        {"a", 3600 * 10 + 5}, {"a", 3600 * 10 + 3599}, {"a", 3600 * 13}, {"b", 7200},
    };
    auto series = bin_events(events);
    REQUIRE(series.size() == 2);
    const auto& a = series.at("a");
    CHECK(a.start_hour == 10);
    CHECK(a.counts == std::vector<double>{2, 0, 0, 1});
    CHECK(series.at("b").counts == std::vector<double>{1});
}

TEST_CASE("epoch_hour_of floors negative seconds") {
    CHECK(epoch_hour_of(0) == 0);
    CHECK(epoch_hour_of(3599) == 0);
    CHECK(epoch_hour_of(-1) == -1);
    CHECK(epoch_hour_of(-3600) == -1);
    CHECK(epoch_hour_of(-3601) == -2);
}

TEST_CASE("NDJSON ingest reports malformed records by line and keeps going") {
    auto dir = testing::scratch_dir("ingest");
    write_text(dir / "ev.ndjson",
               "{\"community\": \"x\", \"created_utc\": 36000}\n"
               "not json\n"
               "{\"community\": \"x\"}\n"
               "\n"
               "{\"community\": \"x\", \"created_utc\": 39600}\n"
               "{\"community\": \"y\", \"created_utc\": -5}\n");
    auto binned = bin_event_file(dir / "ev.ndjson");
    CHECK(binned.accepted == 2);
    REQUIRE(binned.errors.size() == 3);
    CHECK(binned.errors[0].line == 2);
    CHECK(binned.errors[1].line == 3);
    CHECK(binned.errors[2].line == 6);
    REQUIRE(binned.series.size() == 1);
    CHECK(binned.series.at("x").counts == std::vector<double>{1, 1});
}

TEST_CASE("empty event stream gives an empty map") {
    auto dir = testing::scratch_dir("ingest");
    write_text(dir / "empty.ndjson", "");
    auto binned = bin_event_file(dir / "empty.ndjson");
    CHECK(binned.series.empty());
    CHECK(binned.errors.empty());
}

TEST_CASE("CSV events with header") {
    auto dir = testing::scratch_dir("ingest");
    write_text(dir / "ev.csv", "community,created_utc\nq,7200\nq,7300\nq,14400\n");
    auto series = load_series(dir / "ev.csv");
    CHECK(series.at("q").start_hour == 2);
    CHECK(series.at("q").counts == std::vector<double>{2, 0, 1});
}

TEST_CASE("synthetic events round-trip through gzip NDJSON and CSV") {
    auto dir = testing::scratch_dir("ingest");
    auto [raw, label] = generate(testing::clean_spec(-300, 3, 12));
    SeriesMap series;
    series.emplace(label.community_id, raw);
    for (const char* name : {"ev.ndjson.gz", "ev.csv", "ev.jsonl"}) {
        write_events(dir / name, series, 11);
        auto back = load_series(dir / name);
        REQUIRE(back.size() == 1);
        const auto& s = back.at(label.community_id);
        // the span is first to last active hour, which may trim zero hours at the ends
        const auto lead = s.start_hour - raw.start_hour;
        REQUIRE(lead >= 0);
        for (std::size_t i = 0; i < s.counts.size(); ++i) {
            CHECK(s.counts[i] == raw.counts[static_cast<std::size_t>(lead) + i]);
        }
        CHECK(s.total() == doctest::Approx(raw.total()));
    }
}

TEST_CASE("pre-binned input: overlaps are summed, unordered rows reordered, negatives rejected") {
    auto dir = testing::scratch_dir("ingest");
    write_text(dir / "a.csv", "community,epoch_hour,count\nc,12,3\nc,10,1\nc,12,2\n");
    write_text(dir / "b.csv", "community,epoch_hour,count\nc,11,4\n");
    std::vector<std::filesystem::path> paths = {dir / "a.csv", dir / "b.csv"};
    auto series = load_prebinned(paths);
    CHECK(series.at("c").start_hour == 10);
    CHECK(series.at("c").counts == std::vector<double>{1, 4, 5});

    write_text(dir / "neg.csv", "community,epoch_hour,count\nc,12,-3\n");
    CHECK_THROWS_AS(load_prebinned(dir / "neg.csv"), DataError);
}

TEST_CASE("pre-binned write/read round-trip") {
    auto dir = testing::scratch_dir("ingest");
    SeriesMap series;
    ActivitySeries s;
    s.start_hour = 100;
    s.counts = {0, 2, 0, 0, 5, 0};
    series.emplace("z", s);
    write_prebinned(dir / "s.csv", series);
    auto back = load_series(dir / "s.csv");
    CHECK(back.at("z").start_hour == 100);
    CHECK(back.at("z").counts == s.counts);
}

TEST_CASE("ground truth validation") {
    auto dir = testing::scratch_dir("ingest");
    write_text(dir / "dup.csv", "community_id,offset_minutes\na,60\na,60\n");
    CHECK_THROWS_AS(load_ground_truth(dir / "dup.csv", 1), DataError);
    write_text(dir / "grid.csv", "community_id,offset_minutes\na,50\n");
    CHECK_THROWS_AS(load_ground_truth(dir / "grid.csv", 1), DataError);
    write_text(dir / "range.csv", "community_id,offset_minutes\na,900\n");
    CHECK_THROWS_AS(load_ground_truth(dir / "range.csv", 1), DataError);

    write_text(dir / "ok.csv",
               "community_id,offset_minutes,zone_name\na,-300,America/New_York\nb,-300,\nc,330,Asia/Kolkata\n");
    auto labels = load_ground_truth(dir / "ok.csv", 1);
    REQUIRE(labels.size() == 3);
    CHECK(labels[0].zone_name == std::optional<std::string>("America/New_York"));
    CHECK(labels[2].offset_minutes == 330);

    // c is alone in its class
    auto filtered = load_ground_truth(dir / "ok.csv", 2);
    CHECK(filtered.size() == 2);
    CHECK(filter_small_classes(filtered, 2) == filtered);

    write_ground_truth(dir / "back.csv", labels);
    CHECK(load_ground_truth(dir / "back.csv", 1) == labels);
}

TEST_CASE("make_corpus keeps labels that have a series") {
    std::vector<GroundTruthLabel> labels = {{"a", 0, {}}, {"b", 0, {}}, {"c", 60, {}}};
    SeriesMap series;
    series.emplace("a", ActivitySeries{0, {1.0}});
    series.emplace("c", ActivitySeries{0, {1.0}});
    auto corpus = make_corpus(labels, series, 1);
    CHECK(corpus.labels.size() == 2);
    auto strict = make_corpus(labels, series, 2);
    CHECK(strict.labels.empty());
}

TEST_CASE("calendar year helpers") {
    CHECK(epoch_hour_of_year(1970) == 0);
    CHECK(epoch_hour_of_year(2020) == 438288);
    CHECK(year_of_epoch_hour(438288) == 2020);
    CHECK(year_of_epoch_hour(438287) == 2019);
}
