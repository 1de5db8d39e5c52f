#include "circtz/eval.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace circtz {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_sizes(std::size_t a, std::size_t b) {
    if (a != b) {
        throw DataError("metric inputs differ in length: " + std::to_string(a) + " vs " + std::to_string(b));
    }
}

double to_radians(double hours) { return hours * 2.0 * std::numbers::pi / kHoursPerDay; }

}  // namespace

double circular_error_hours(double y_hours, double yhat_hours) {
    double d = std::fmod(std::abs(y_hours - yhat_hours), 24.0);
    return std::min(d, 24.0 - d);
}

double circular_mean(std::span<const double> angles) {
    double s = 0.0;
    double c = 0.0;
    for (double a : angles) {
        s += std::sin(a);
        c += std::cos(a);
    }
    return std::atan2(s, c);
}

double mean_resultant_length(std::span<const double> angles) {
    if (angles.empty()) {
        return 0.0;
    }
    double s = 0.0;
    double c = 0.0;
    for (double a : angles) {
        s += std::sin(a);
        c += std::cos(a);
    }
    return std::hypot(s, c) / static_cast<double>(angles.size());
}

double circular_correlation(std::span<const double> y_hours, std::span<const double> yhat_hours) {
    check_sizes(y_hours.size(), yhat_hours.size());
    if (y_hours.size() < 2) {
        return kNaN;
    }
    std::vector<double> a(y_hours.size());
    std::vector<double> b(yhat_hours.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = to_radians(y_hours[i]);
        b[i] = to_radians(yhat_hours[i]);
    }
    // A balanced sample (e.g. equal counts on every hour) has no mean direction.
    constexpr double kMinResultant = 1e-9;
    if (mean_resultant_length(a) < kMinResultant || mean_resultant_length(b) < kMinResultant) {
        return kNaN;
    }
    const double abar = circular_mean(a);
    const double bbar = circular_mean(b);
    double num = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double sa = std::sin(a[i] - abar);
        const double sb = std::sin(b[i] - bbar);
        num += sa * sb;
        saa += sa * sa;
        sbb += sb * sb;
    }
    const double den = std::sqrt(saa * sbb);
    if (!(den > 1e-12)) {
        return kNaN;
    }
    return std::clamp(num / den, -1.0, 1.0);
}

ConfusionMatrix confusion_matrix(std::span<const int> truth_minutes, std::span<const int> pred_minutes) {
    check_sizes(truth_minutes.size(), pred_minutes.size());
    ConfusionMatrix m{};
    for (std::size_t i = 0; i < truth_minutes.size(); ++i) {
        const auto t = static_cast<std::size_t>(hour_class_index(offset_to_hour_class(truth_minutes[i])));
        const auto p = static_cast<std::size_t>(hour_class_index(offset_to_hour_class(pred_minutes[i])));
        ++m[t][p];
    }
    return m;
}

double weighted_kappa(std::span<const int> truth_minutes, std::span<const int> pred_minutes) {
    const ConfusionMatrix m = confusion_matrix(truth_minutes, pred_minutes);
    const double n = static_cast<double>(truth_minutes.size());
    if (n == 0) {
        return kNaN;
    }
    std::array<double, kHoursPerDay> rows{};
    std::array<double, kHoursPerDay> cols{};
    for (std::size_t i = 0; i < kHoursPerDay; ++i) {
        for (std::size_t j = 0; j < kHoursPerDay; ++j) {
            rows[i] += static_cast<double>(m[i][j]);
            cols[j] += static_cast<double>(m[i][j]);
        }
    }
    double observed = 0.0;
    double expected = 0.0;
    for (std::size_t i = 0; i < kHoursPerDay; ++i) {
        for (std::size_t j = 0; j < kHoursPerDay; ++j) {
            const double w = std::abs(static_cast<double>(i) - static_cast<double>(j));
            observed += w * static_cast<double>(m[i][j]);
            expected += w * rows[i] * cols[j] / n;
        }
    }
    if (!(expected > 0.0)) {
        return kNaN;
    }
    return 1.0 - observed / expected;
}

double weighted_f1(std::span<const int> truth_minutes, std::span<const int> pred_minutes) {
    const ConfusionMatrix m = confusion_matrix(truth_minutes, pred_minutes);
    const double n = static_cast<double>(truth_minutes.size());
    if (n == 0) {
        return kNaN;
    }
    double total = 0.0;
    for (std::size_t c = 0; c < kHoursPerDay; ++c) {
        double tp = static_cast<double>(m[c][c]);
        double support = 0.0;
        double predicted = 0.0;
        for (std::size_t k = 0; k < kHoursPerDay; ++k) {
            support += static_cast<double>(m[c][k]);
            predicted += static_cast<double>(m[k][c]);
        }
        if (support == 0.0) {
            continue;
        }
        const double precision = predicted > 0.0 ? tp / predicted : 0.0;
        const double recall = tp / support;
        const double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        total += f1 * support / n;
    }
    return total;
}

double accuracy(std::span<const int> truth_minutes, std::span<const int> pred_minutes) {
    check_sizes(truth_minutes.size(), pred_minutes.size());
    if (truth_minutes.empty()) {
        return kNaN;
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth_minutes.size(); ++i) {
        hits += wrap_minutes(truth_minutes[i]) == wrap_minutes(pred_minutes[i]) ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(truth_minutes.size());
}

Metrics score(std::span<const int> truth_minutes, std::span<const int> pred_minutes) {
    check_sizes(truth_minutes.size(), pred_minutes.size());
    Metrics m;
    m.n = truth_minutes.size();
    std::vector<double> y(m.n);
    std::vector<double> yhat(m.n);
    double err = 0.0;
    for (std::size_t i = 0; i < m.n; ++i) {
        y[i] = truth_minutes[i] / 60.0;
        yhat[i] = pred_minutes[i] / 60.0;
        err += circular_error_hours(y[i], yhat[i]);
    }
    m.mean_circular_error = m.n > 0 ? err / static_cast<double>(m.n) : kNaN;
    m.accuracy = accuracy(truth_minutes, pred_minutes);
    m.circular_correlation = circular_correlation(y, yhat);
    m.weighted_kappa = weighted_kappa(truth_minutes, pred_minutes);
    m.weighted_f1 = weighted_f1(truth_minutes, pred_minutes);
    auto flag = [&](double v, std::string_view name) {
        if (std::isnan(v)) {
            m.flags += m.flags.empty() ? "" : ";";
            m.flags += std::string(name) + "_undefined";
        }
    };
    flag(m.circular_correlation, "rho");
    flag(m.weighted_kappa, "kappa");
    flag(m.accuracy, "accuracy");
    return m;
}

}  // namespace circtz
