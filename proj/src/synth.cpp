#include "circtz/synth.hpp"

#include "circtz/common.hpp"
#include "circtz/rng.hpp"

#include <json.hpp>
#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>

namespace circtz {
namespace {

// Daily curve in [0, 1] with its unique minimum 0 at the trough.
double unit_shape(double local_hour, double trough, double concentration) {
    const double peak = trough + 12.0;
    const double f = std::exp(concentration * std::cos(2.0 * std::numbers::pi * (local_hour - peak) / 24.0));
    const double lo = std::exp(-concentration);
    const double hi = std::exp(concentration);
    return (f - lo) / (hi - lo);
}

double mean_unit_shape(double concentration) {
    double s = 0.0;
    for (int h = 0; h < kHoursPerDay; ++h) {
        s += unit_shape(h, 0.0, concentration);
    }
    return s / kHoursPerDay;
}

struct Population {
    double offset_hours;
    double weight;
};

std::vector<Population> populations(const SynthSpec& spec) {
    if (!spec.mixture) {
        return {{spec.offset_minutes / 60.0, 1.0}};
    }
    return {{spec.offset_minutes / 60.0, 1.0 - spec.mixture->second}, {spec.mixture->first / 60.0, spec.mixture->second}};
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

}  // namespace

void SynthSpec::validate() const {
    if (n_days < 1) {
        throw UsageError("synthetic n_days must be >= 1");
    }
    if (!(mean_daily_events > 0.0)) {
        throw UsageError("synthetic mean_daily_events must be > 0");
    }
    if (!(trough_depth > 0.0 && trough_depth <= 1.0)) {
        throw UsageError("synthetic trough_depth must lie in (0, 1]");
    }
    if (!(concentration > 0.0)) {
        throw UsageError("synthetic concentration must be > 0");
    }
    if (phase_jitter_rad < 0.0 || daily_volume_sigma < 0.0) {
        throw UsageError("synthetic noise parameters must be >= 0");
    }
    if (offset_minutes < kMinOffsetMinutes || offset_minutes > kMaxOffsetMinutes || offset_minutes % 15 != 0) {
        throw UsageError("synthetic offset must be a multiple of 15 in [-720, 840]");
    }
    if (mixture && !(mixture->second >= 0.0 && mixture->second <= 1.0)) {
        throw UsageError("mixture weight must lie in [0, 1]");
    }
}

std::vector<double> expected_hourly_intensity(const SynthSpec& spec) {
    const double base = spec.mean_daily_events / kHoursPerDay /
                        ((1.0 - spec.trough_depth) + spec.trough_depth * mean_unit_shape(spec.concentration));
    std::vector<double> out(kHoursPerDay, 0.0);
    for (const auto& pop : populations(spec)) {
        for (int h = 0; h < kHoursPerDay; ++h) {
            const double g = unit_shape(h + pop.offset_hours, spec.trough_hour_local, spec.concentration);
            out[static_cast<std::size_t>(h)] += pop.weight * base * ((1.0 - spec.trough_depth) + spec.trough_depth * g);
        }
    }
    return out;
}

std::pair<ActivitySeries, GroundTruthLabel> generate(const SynthSpec& spec) {
    spec.validate();
    Rng rng(derive_seed(spec.seed, spec.community_id));
    std::normal_distribution<double> normal(0.0, 1.0);

    const std::size_t n_hours = static_cast<std::size_t>(spec.n_days) * kHoursPerDay;
    const double base = spec.mean_daily_events / kHoursPerDay /
                        ((1.0 - spec.trough_depth) + spec.trough_depth * mean_unit_shape(spec.concentration));
    const auto pops = populations(spec);

    // Per-local-day perturbations, keyed by (population, local day index).
    std::vector<std::map<std::int64_t, std::pair<double, double>>> day_noise(pops.size());
    auto noise_for = [&](std::size_t p, std::int64_t day) {
        auto it = day_noise[p].find(day);
        if (it == day_noise[p].end()) {
            const double shift = spec.phase_jitter_rad * normal(rng) * 24.0 / (2.0 * std::numbers::pi);
            const double sigma = spec.daily_volume_sigma;
            const double volume = std::exp(sigma * normal(rng) - 0.5 * sigma * sigma);
            it = day_noise[p].emplace(day, std::make_pair(shift, volume)).first;
        }
        return it->second;
    };

    std::int64_t spike_start = -1;
    if (spec.trend == Trend::Spike && n_hours > 48) {
        spike_start = static_cast<std::int64_t>(uniform_index(rng, n_hours - 48));
    }

    ActivitySeries series;
    series.start_hour = spec.start_hour;
    series.counts.resize(n_hours);
    for (std::size_t t = 0; t < n_hours; ++t) {
        const std::int64_t utc_hour = spec.start_hour + static_cast<std::int64_t>(t);
        double intensity = 0.0;
        for (std::size_t p = 0; p < pops.size(); ++p) {
            const std::int64_t local_minutes = utc_hour * 60 + std::llround(pops[p].offset_hours * 60.0);
            const std::int64_t local_day = floor_div(local_minutes, 24 * 60);
            const double local_hour = static_cast<double>(local_minutes - local_day * 24 * 60) / 60.0;
            double shift = 0.0;
            double volume = 1.0;
            if (spec.phase_jitter_rad > 0.0 || spec.daily_volume_sigma > 0.0) {
                std::tie(shift, volume) = noise_for(p, local_day);
            }
            const double g = unit_shape(local_hour - shift, spec.trough_hour_local, spec.concentration);
            intensity += pops[p].weight * volume * base * ((1.0 - spec.trough_depth) + spec.trough_depth * g);
        }
        switch (spec.trend) {
            case Trend::None:
                break;
            case Trend::LinearGrowth:
                intensity *= 0.5 + static_cast<double>(t) / static_cast<double>(n_hours);
                break;
            case Trend::Spike:
                if (spike_start >= 0 && static_cast<std::int64_t>(t) >= spike_start &&
                    static_cast<std::int64_t>(t) < spike_start + 48) {
                    intensity *= 20.0;
                }
                break;
        }
        if (intensity > 0.0) {
            std::poisson_distribution<long long> poisson(intensity);
            series.counts[t] = static_cast<double>(poisson(rng));
        }
    }

    GroundTruthLabel label{spec.community_id, spec.offset_minutes, std::nullopt};
    return {std::move(series), std::move(label)};
}

CorpusSpec default_corpus_spec(std::uint64_t seed) {
    CorpusSpec spec;
    for (int h = -11; h <= 12; ++h) {
        spec.offsets_minutes.push_back(h * 60);
    }
    spec.per_class = 4;
    // clean troughs: the lull hour itself carries no activity
    spec.base.trough_depth = 1.0;
    spec.seed = seed;
    return spec;
}

CorpusSpec skewed_corpus_spec(std::uint64_t seed) {
    CorpusSpec spec = default_corpus_spec(seed);
    spec.class_sizes = {2, 2, 2, 5, 4, 8, 11, 2, 4, 2, 2, 5, 9, 3, 3, 2, 4, 2, 2, 4, 2, 3, 2, 2};
    return spec;
}

LabeledCorpus generate_corpus(const CorpusSpec& spec) {
    if (!spec.class_sizes.empty() && spec.class_sizes.size() != spec.offsets_minutes.size()) {
        throw UsageError("class_sizes needs one entry per offset");
    }
    const auto size_of = [&](std::size_t i) { return spec.class_sizes.empty() ? spec.per_class : spec.class_sizes[i]; };
    for (std::size_t i = 0; i < spec.offsets_minutes.size(); ++i) {
        if (size_of(i) < 2) {
            throw UsageError("every offset class needs >= 2 members so it keeps a reference and a target");
        }
    }
    if (spec.first_year > spec.last_year) {
        throw UsageError("first_year must not exceed last_year");
    }
    LabeledCorpus corpus;
    Rng rng(derive_seed(spec.seed, "corpus"));
    const auto n_years = static_cast<std::size_t>(spec.last_year - spec.first_year + 1);
    for (std::size_t i = 0; i < spec.offsets_minutes.size(); ++i) {
        const int offset = spec.offsets_minutes[i];
        for (int k = 0; k < size_of(i); ++k) {
            SynthSpec s = spec.base;
            char id[64];
            const int a = std::abs(offset);
            std::snprintf(id, sizeof(id), "tz%c%02d%02d-%02d", offset < 0 ? 'm' : 'p', a / 60, a % 60, k);
            s.community_id = id;
            s.offset_minutes = offset;
            s.seed = spec.seed;
            const int year = spec.first_year + static_cast<int>(uniform_index(rng, n_years));
            s.start_hour = epoch_hour_of_year(year) + static_cast<std::int64_t>(uniform_index(rng, 180)) * 24 +
                           static_cast<std::int64_t>(uniform_index(rng, 24));
            auto [series, label] = generate(s);
            corpus.series.emplace(label.community_id, std::move(series));
            corpus.labels.push_back(std::move(label));
        }
    }
    std::sort(corpus.labels.begin(), corpus.labels.end(),
              [](const GroundTruthLabel& x, const GroundTruthLabel& y) { return x.community_id < y.community_id; });
    return corpus;
}

void write_events(const std::filesystem::path& path, const SeriesMap& series, std::uint64_t seed) {
    std::string name = path.filename().string();
    const bool gz = name.size() > 3 && name.ends_with(".gz");
    if (gz) {
        name.resize(name.size() - 3);
    }
    const bool ndjson = name.ends_with(".ndjson") || name.ends_with(".jsonl") || name.ends_with(".json");
    if (!ndjson && !name.ends_with(".csv")) {
        throw UsageError("event output must end in .ndjson, .jsonl or .csv (optionally .gz): " + path.string());
    }
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    gzFile out = gzopen(path.string().c_str(), gz ? "wb6" : "wbT");
    if (out == nullptr) {
        throw DataError("cannot write " + path.string());
    }
    std::string buffer;
    if (!ndjson) {
        buffer = "community,created_utc\n";
    }
    for (const auto& [id, s] : series) {
        Rng rng(derive_seed(seed, id));
        const std::string quoted = nlohmann::json(id).dump();
        for (std::size_t t = 0; t < s.counts.size(); ++t) {
            const auto n = static_cast<long long>(std::llround(s.counts[t]));
            for (long long e = 0; e < n; ++e) {
                const std::int64_t ts = (s.start_hour + static_cast<std::int64_t>(t)) * 3600 +
                                        static_cast<std::int64_t>(uniform_index(rng, 3600));
                if (ndjson) {
                    buffer += "{\"community\":" + quoted + ",\"created_utc\":" + std::to_string(ts) + "}\n";
                } else {
                    buffer += id + "," + std::to_string(ts) + "\n";
                }
            }
            if (buffer.size() > (1u << 20)) {
                gzwrite(out, buffer.data(), static_cast<unsigned>(buffer.size()));
                buffer.clear();
            }
        }
    }
    if (!buffer.empty()) {
        gzwrite(out, buffer.data(), static_cast<unsigned>(buffer.size()));
    }
    if (gzclose(out) != Z_OK) {
        throw DataError("failed writing " + path.string());
    }
}

std::string trend_name(Trend t) {
    switch (t) {
        case Trend::None:
            return "none";
        case Trend::LinearGrowth:
            return "linear_growth";
        case Trend::Spike:
            return "spike";
    }
    return "none";
}

Trend parse_trend(const std::string& name) {
    if (name == "none") {
        return Trend::None;
    }
    if (name == "linear_growth") {
        return Trend::LinearGrowth;
    }
    if (name == "spike") {
        return Trend::Spike;
    }
    throw UsageError("unknown trend '" + name + "'; expected none, linear_growth or spike");
}

namespace {

SynthSpec spec_from_json(const nlohmann::json& j, SynthSpec s) {
    s.community_id = j.value("community_id", s.community_id);
    s.offset_minutes = j.value("offset_minutes", s.offset_minutes);
    s.n_days = j.value("n_days", s.n_days);
    s.mean_daily_events = j.value("mean_daily_events", s.mean_daily_events);
    s.trough_hour_local = j.value("trough_hour_local", s.trough_hour_local);
    s.trough_depth = j.value("trough_depth", s.trough_depth);
    s.concentration = j.value("concentration", s.concentration);
    s.trend = parse_trend(j.value("trend", trend_name(s.trend)));
    s.phase_jitter_rad = j.value("phase_jitter_rad", s.phase_jitter_rad);
    s.daily_volume_sigma = j.value("daily_volume_sigma", s.daily_volume_sigma);
    s.start_hour = j.value("start_hour", s.start_hour);
    s.seed = j.value("seed", s.seed);
    if (j.contains("mixture")) {
        const auto& m = j.at("mixture");
        s.mixture = std::make_pair(m.at("offset_minutes").get<int>(), m.at("weight").get<double>());
    }
    return s;
}

}  // namespace

CorpusSpec read_corpus_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    try {
        CorpusSpec spec;
        if (j.contains("offsets")) {
            spec.offsets_minutes = j.at("offsets").get<std::vector<int>>();
            spec.per_class = j.value("per_class", spec.per_class);
            spec.class_sizes = j.value("class_sizes", spec.class_sizes);
            spec.seed = j.value("seed", spec.seed);
            spec.first_year = j.value("first_year", spec.first_year);
            spec.last_year = j.value("last_year", spec.last_year);
            spec.base = spec_from_json(j.value("base", nlohmann::json::object()), SynthSpec{});
        } else {
            // single community: emitted alone, no class-size requirement applies
            spec.base = spec_from_json(j, SynthSpec{});
            spec.offsets_minutes = {spec.base.offset_minutes};
            spec.per_class = 1;
            spec.seed = spec.base.seed;
        }
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

}  // namespace circtz
