#include "circtz/common.hpp"

#include <cmath>

namespace circtz {

std::string_view method_name(Method m) {
    switch (m) {
        case Method::ActivityCounts:
            return "ActivityCounts";
        case Method::ActivityCountsSmooth:
            return "ActivityCountsSmooth";
        case Method::ActivityLull:
            return "ActivityLull";
        case Method::ActivityLullSmooth:
            return "ActivityLullSmooth";
        case Method::Rhythm:
            return "Rhythm";
        case Method::MostStableRhythm:
            return "MostStableRhythm";
    }
    return "?";
}

Method parse_method(std::string_view name) {
    for (Method m : kAllMethods) {
        if (method_name(m) == name) {
            return m;
        }
    }
    std::string valid;
    for (Method m : kAllMethods) {
        valid += valid.empty() ? "" : ", ";
        valid += method_name(m);
    }
    throw UsageError("unknown method '" + std::string(name) + "'; valid methods: " + valid);
}

bool needs_pool(Method m) {
    return m == Method::ActivityCounts || m == Method::ActivityCountsSmooth || m == Method::Rhythm;
}

int offset_to_hour_class(int offset_minutes) {
    const double hours = static_cast<double>(offset_minutes) / 60.0;
    long long h = std::llround(hours);  // half away from zero
    h %= 24;
    if (h <= -12) {
        h += 24;
    } else if (h > 12) {
        h -= 24;
    }
    return static_cast<int>(h);
}

int canonical_rotation(std::span<const double, kHoursPerDay> v) {
    int best = 0;
    for (int r = 1; r < kHoursPerDay; ++r) {
        for (int i = 0; i < kHoursPerDay; ++i) {
            const double a = v[static_cast<std::size_t>((i + r) % kHoursPerDay)];
            const double b = v[static_cast<std::size_t>((i + best) % kHoursPerDay)];
            if (a != b) {
                if (a < b) {
                    best = r;
                }
                break;
            }
        }
    }
    return best;
}

double cyclic_sum(std::span<const double, kHoursPerDay> v) {
    const int start = canonical_rotation(v);
    double total = 0.0;
    for (int i = 0; i < kHoursPerDay; ++i) {
        total += v[static_cast<std::size_t>((i + start) % kHoursPerDay)];
    }
    return total;
}

}  // namespace circtz
