#include "circtz/csv.hpp"
#include "circtz/features.hpp"

namespace circtz {
namespace {

constexpr std::array<const char*, 6> kVectorPrefixes = {"p", "lambda", "power", "phase", "coherence", "stability"};

std::array<HourVector*, 6> vectors_of(CommunityFeatures& f) {
    return {&f.profile.p, &f.smoothed.lambda, &f.rhythm.power, &f.rhythm.mean_phase, &f.rhythm.coherence,
            &f.rhythm.stability};
}

}  // namespace

void write_features(const std::filesystem::path& path, std::span<const CommunityFeatures> features) {
    csv::Writer w(path);
    std::vector<std::string> header = {"community_id", "offset_minutes", "start_hour", "n_hours", "total_events"};
    for (const char* prefix : kVectorPrefixes) {
        for (int h = 0; h < kHoursPerDay; ++h) {
            header.push_back(std::string(prefix) + "_" + std::to_string(h));
        }
    }
    for (const char* name : {"h_min", "h_smooth_min", "h_stable_phase", "profile_degenerate", "detrend_fallback",
                             "gam_converged"}) {
        header.emplace_back(name);
    }
    w.row(header);

    for (const auto& cf : features) {
        auto f = cf;
        std::vector<std::string> row = {f.community_id,
                                        f.offset_minutes ? std::to_string(*f.offset_minutes) : std::string(),
                                        std::to_string(f.start_hour), std::to_string(f.n_hours),
                                        csv::format_double(f.total_events)};
        for (HourVector* v : vectors_of(f)) {
            for (double x : *v) {
                row.push_back(csv::format_double(x));
            }
        }
        row.push_back(std::to_string(f.scalars.h_min));
        row.push_back(csv::format_double(f.scalars.h_smooth_min));
        row.push_back(std::to_string(f.scalars.h_stable_phase));
        row.push_back(f.profile.degenerate ? "1" : "0");
        row.push_back(f.detrend_fallback ? "1" : "0");
        row.push_back(f.gam_converged ? "1" : "0");
        w.row(row);
    }
    w.close();
}

std::vector<CommunityFeatures> read_features(const std::filesystem::path& path) {
    const auto table = csv::read_table(path);
    const auto id = table.column("community_id", path);
    const auto off = table.column("offset_minutes", path);
    const auto start = table.column("start_hour", path);
    const auto nh = table.column("n_hours", path);
    const auto tot = table.column("total_events", path);
    std::array<std::size_t, 6> first{};
    for (std::size_t v = 0; v < kVectorPrefixes.size(); ++v) {
        first[v] = table.column(std::string(kVectorPrefixes[v]) + "_0", path);
    }
    const auto hmin = table.column("h_min", path);
    const auto hsm = table.column("h_smooth_min", path);
    const auto hst = table.column("h_stable_phase", path);
    const auto degen = table.column("profile_degenerate", path);
    const auto fallback = table.column("detrend_fallback", path);
    const auto conv = table.column("gam_converged", path);

    std::vector<CommunityFeatures> out;
    out.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        try {
            CommunityFeatures f;
            f.community_id = row[id];
            if (!row[off].empty()) {
                f.offset_minutes = static_cast<int>(csv::parse_int(row[off], "offset_minutes"));
            }
            f.start_hour = csv::parse_int(row[start], "start_hour");
            f.n_hours = static_cast<std::size_t>(csv::parse_int(row[nh], "n_hours"));
            f.total_events = csv::parse_double(row[tot], "total_events");
            auto vecs = vectors_of(f);
            for (std::size_t v = 0; v < vecs.size(); ++v) {
                for (std::size_t h = 0; h < kHoursPerDay; ++h) {
                    (*vecs[v])[h] = csv::parse_double(row[first[v] + h], kVectorPrefixes[v]);
                }
            }
            f.scalars.h_min = static_cast<int>(csv::parse_int(row[hmin], "h_min"));
            f.scalars.h_smooth_min = csv::parse_double(row[hsm], "h_smooth_min");
            f.scalars.h_stable_phase = static_cast<int>(csv::parse_int(row[hst], "h_stable_phase"));
            f.profile.degenerate = row[degen] == "1";
            f.detrend_fallback = row[fallback] == "1";
            f.gam_converged = row[conv] == "1";
            f.smoothed.converged = f.gam_converged;
            out.push_back(std::move(f));
        } catch (const DataError& e) {
            throw DataError(path.string() + ":" + std::to_string(table.line_numbers[r]) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace circtz
