#pragma once

// Small helpers shared by the unit tests.

#include "circtz/common.hpp"
#include "circtz/features.hpp"
#include "circtz/rng.hpp"
#include "circtz/synth.hpp"

#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

namespace testing {

inline circtz::FeatureConfig default_features() { return {}; }

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    static int counter = 0;
    auto dir = std::filesystem::temp_directory_path() /
               ("circtz_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline circtz::SynthSpec clean_spec(int offset_minutes, std::uint64_t seed, int days = 60) {
    circtz::SynthSpec s;
    s.community_id = "c" + std::to_string(offset_minutes);
    s.offset_minutes = offset_minutes;
    s.n_days = days;
    s.trough_depth = 1.0;
    s.seed = seed;
    return s;
}

inline circtz::ActivitySeries detrended(circtz::ActivitySeries raw) {
    return circtz::preprocess(std::move(raw), circtz::DetrendConfig{});
}

}  // namespace testing
