#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace circtz {

inline constexpr int kHoursPerDay = 24;
inline constexpr int kMinutesPerDay = 24 * 60;
inline constexpr int kMinOffsetMinutes = -720;
inline constexpr int kMaxOffsetMinutes = 840;

using HourVector = std::array<double, kHoursPerDay>;

/// Bad input data (malformed file, violated data invariant). Maps to exit code 1.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad invocation (unknown flag, unknown method, invalid knob). Maps to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Method {
    ActivityCounts,
    ActivityCountsSmooth,
    ActivityLull,
    ActivityLullSmooth,
    Rhythm,
    MostStableRhythm,
};

inline constexpr std::array<Method, 6> kAllMethods = {
    Method::ActivityCounts, Method::ActivityCountsSmooth, Method::ActivityLull,
    Method::ActivityLullSmooth, Method::Rhythm, Method::MostStableRhythm,
};

std::string_view method_name(Method m);
/// Throws UsageError listing the six valid names.
Method parse_method(std::string_view name);
bool needs_pool(Method m);

/// Wraps minutes into [0, 1440).
inline int wrap_minutes(long long minutes) {
    long long r = minutes % kMinutesPerDay;
    return static_cast<int>(r < 0 ? r + kMinutesPerDay : r);
}

/// Integer hour of an offset, rounded half away from zero and wrapped into (-12, 12].
int offset_to_hour_class(int offset_minutes);

/// Index 0..23 of the hour class -11..+12.
inline int hour_class_index(int hour_class) { return hour_class + 11; }

/// Start of the lexicographically smallest rotation of a 24-vector (first one on ties).
int canonical_rotation(std::span<const double, kHoursPerDay> v);

/// Sum taken from the canonical rotation onwards, so rotating the input never changes the rounding.
double cyclic_sum(std::span<const double, kHoursPerDay> v);

inline int hour_of_day(std::int64_t epoch_hour) {
    std::int64_t r = epoch_hour % kHoursPerDay;
    return static_cast<int>(r < 0 ? r + kHoursPerDay : r);
}

}  // namespace circtz
