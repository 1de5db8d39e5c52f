#include "circtz/analyze.hpp"

#include "circtz/csv.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace circtz {

double YearlyOffsetDistribution::total() const {
    double t = 0.0;
    for (const auto& [offset, m] : mass) {
        t += m;
    }
    return t;
}

HourVector YearlyOffsetDistribution::hour_bins() const {
    HourVector bins{};
    for (const auto& [offset, m] : mass) {
        bins[static_cast<std::size_t>(hour_class_index(offset_to_hour_class(offset)))] += m;
    }
    return bins;
}

void write_communities(const std::filesystem::path& path, std::span<const CommunityInfo> info) {
    csv::Writer w(path);
    w.row({"community_id", "start_hour", "first_year", "n_hours", "total_events"});
    for (const auto& c : info) {
        w.row({c.community_id, std::to_string(c.start_hour), std::to_string(c.first_year), std::to_string(c.n_hours),
               csv::format_double(c.total_events)});
    }
    w.close();
}

std::vector<CommunityInfo> read_communities(const std::filesystem::path& path) {
    const auto table = csv::read_table(path);
    const auto id = table.column("community_id", path);
    const auto start = table.column("start_hour", path);
    const auto year = table.column("first_year", path);
    const auto nh = table.column("n_hours", path);
    const auto tot = table.column("total_events", path);
    std::vector<CommunityInfo> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        try {
            out.push_back({row[id], csv::parse_int(row[start], "start_hour"),
                           static_cast<int>(csv::parse_int(row[year], "first_year")),
                           static_cast<std::size_t>(csv::parse_int(row[nh], "n_hours")),
                           csv::parse_double(row[tot], "total_events")});
        } catch (const DataError& e) {
            throw DataError(path.string() + ":" + std::to_string(table.line_numbers[r]) + ": " + e.what());
        }
    }
    return out;
}

std::vector<YearlyOffsetDistribution> yearly_distribution(std::span<const OffsetPrediction> predictions,
                                                          std::span<const CommunityInfo> communities,
                                                          bool weight_by_volume) {
    std::map<std::string, const CommunityInfo*> by_id;
    for (const auto& c : communities) {
        by_id.emplace(c.community_id, &c);
    }
    std::map<int, YearlyOffsetDistribution> years;
    std::size_t missing = 0;
    for (const auto& p : predictions) {
        auto it = by_id.find(p.community_id);
        if (it == by_id.end()) {
            ++missing;
            continue;
        }
        auto& d = years[it->second->first_year];
        d.year = it->second->first_year;
        d.mass[p.offset_minutes] += weight_by_volume ? it->second->total_events : 1.0;
    }
    if (missing > 0) {
        spdlog::warn("{} prediction(s) have no community record and were ignored", missing);
    }
    std::vector<YearlyOffsetDistribution> out;
    for (auto& [year, d] : years) {
        out.push_back(std::move(d));
    }
    return out;
}

double gini(std::span<const double, kHoursPerDay> mass) {
    double total = 0.0;
    for (double m : mass) {
        if (m < 0.0) {
            throw DataError("gini needs non-negative masses");
        }
        total += m;
    }
    if (!(total > 0.0)) {
        throw DataError("gini of an all-zero distribution");
    }
    double diff = 0.0;
    for (double a : mass) {
        for (double b : mass) {
            diff += std::abs(a - b);
        }
    }
    return diff / (2.0 * kHoursPerDay * total);
}

std::vector<GrowthCell> growth_index(std::span<const YearlyOffsetDistribution> yearly, int base_year,
                                     double epsilon) {
    const YearlyOffsetDistribution* base = nullptr;
    for (const auto& y : yearly) {
        if (y.year == base_year) {
            base = &y;
        }
    }
    if (base == nullptr) {
        throw DataError("growth index: base year " + std::to_string(base_year) + " has no communities");
    }
    const HourVector base_bins = base->hour_bins();
    std::vector<GrowthCell> out;
    for (const auto& y : yearly) {
        const HourVector bins = y.hour_bins();
        for (int k = 0; k < kHoursPerDay; ++k) {
            const auto i = static_cast<std::size_t>(k);
            out.push_back({y.year, kShiftHours[i], std::log2((bins[i] + epsilon) / (base_bins[i] + epsilon))});
        }
    }
    return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw DataError("pearson needs two equally long samples of size >= 2");
    }
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (!(saa > 0.0 && sbb > 0.0)) {
        return std::nan("");
    }
    return sab / std::sqrt(saa * sbb);
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) {
            ++j;
        }
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = r;
        }
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    return pearson(ra, rb);
}

PopulationCorrelation population_correlation(const HourVector& inferred, const HourVector& external) {
    return {pearson(inferred, external), spearman(inferred, external)};
}

HourVector read_population(const std::filesystem::path& path) {
    const auto table = csv::read_table(path);
    const auto off = table.column("offset_minutes", path);
    const auto share = table.column("real_share", path);
    HourVector out{};
    std::set<int> seen;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        try {
            const int offset = static_cast<int>(csv::parse_int(row[off], "offset_minutes"));
            const double s = csv::parse_double(row[share], "real_share");
            if (s < 0.0) {
                throw DataError("negative share");
            }
            const int cls = offset_to_hour_class(offset);
            seen.insert(cls);
            out[static_cast<std::size_t>(hour_class_index(cls))] += s;
        } catch (const DataError& e) {
            throw DataError(path.string() + ":" + std::to_string(table.line_numbers[r]) + ": " + e.what());
        }
    }
    if (seen.size() < kHoursPerDay) {
        spdlog::warn("{}: {} of 24 offsets missing, treated as zero share", path.string(), kHoursPerDay - seen.size());
    }
    return out;
}

}  // namespace circtz
