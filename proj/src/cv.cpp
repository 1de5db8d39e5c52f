#include "circtz/csv.hpp"
#include "circtz/eval.hpp"
#include "circtz/rng.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

namespace circtz {

std::vector<int> dummy_baseline(std::span<const int> reference_offsets, std::size_t n_targets, std::uint64_t seed) {
    if (reference_offsets.empty()) {
        throw DataError("dummy baseline needs at least one reference label");
    }
    Rng rng(seed);
    std::vector<int> out(n_targets);
    for (auto& o : out) {
        o = reference_offsets[uniform_index(rng, reference_offsets.size())];
    }
    return out;
}

void SplitPlan::validate() const {
    if (iterations < 1) {
        throw UsageError("iterations must be >= 1");
    }
    if (!(reference_fraction > 0.0 && reference_fraction < 1.0)) {
        throw UsageError("reference fraction must lie in (0, 1)");
    }
}

Split stratified_split(std::span<const int> offsets, double reference_fraction, std::uint64_t seed) {
    std::map<int, std::vector<std::size_t>> classes;
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        classes[offsets[i]].push_back(i);
    }
    Rng rng(seed);
    Split split;
    for (auto& [offset, members] : classes) {
        if (members.size() < 2) {
            throw DataError("offset class " + std::to_string(offset) +
                            " has a single member; filter classes smaller than 2 before evaluation");
        }
        for (std::size_t i = members.size() - 1; i > 0; --i) {
            std::swap(members[i], members[uniform_index(rng, i + 1)]);
        }
        const auto wanted = static_cast<long long>(std::llround(reference_fraction * static_cast<double>(members.size())));
        const auto n_ref = static_cast<std::size_t>(std::clamp<long long>(wanted, 1, static_cast<long long>(members.size()) - 1));
        split.reference.insert(split.reference.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_ref));
        split.targets.insert(split.targets.end(), members.begin() + static_cast<std::ptrdiff_t>(n_ref), members.end());
    }
    std::sort(split.reference.begin(), split.reference.end());
    std::sort(split.targets.begin(), split.targets.end());
    return split;
}

const Metrics& EvalReport::aggregate(std::string_view method) const {
    for (const auto& a : aggregates) {
        if (a.method == method) {
            return a.metrics;
        }
    }
    throw DataError("report has no method " + std::string(method));
}

std::vector<MethodIteration> evaluate_iteration(std::span<const CommunityFeatures> features,
                                                std::span<const Method> methods, const SplitPlan& plan, int iteration,
                                                const InferConfig& config, std::vector<TargetOutcome>* outcomes,
                                                std::map<std::string, ConfusionMatrix>* confusion) {
    std::vector<int> offsets(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (!features[i].offset_minutes) {
            throw DataError("community '" + features[i].community_id + "' has no ground-truth offset");
        }
        offsets[i] = *features[i].offset_minutes;
    }
    const std::uint64_t iter_seed = derive_seed(derive_seed(plan.seed, "cv"), static_cast<std::uint64_t>(iteration));
    const Split split = stratified_split(offsets, plan.reference_fraction, derive_seed(iter_seed, "split"));

    std::vector<PoolEntry> refs;
    std::vector<int> ref_offsets;
    for (std::size_t i : split.reference) {
        refs.push_back(to_pool_entry(features[i]));
        ref_offsets.push_back(offsets[i]);
    }
    const ReferencePool pool = ReferencePool::from_entries(std::move(refs));

    std::vector<int> truth;
    for (std::size_t i : split.targets) {
        truth.push_back(offsets[i]);
    }

    std::vector<MethodIteration> rows;
    auto record = [&](const std::string& name, const std::vector<int>& pred) {
        rows.push_back({name, iteration, score(truth, pred)});
        if (confusion != nullptr) {
            auto cm = confusion_matrix(truth, pred);
            auto& acc = (*confusion)[name];
            for (std::size_t a = 0; a < kHoursPerDay; ++a) {
                for (std::size_t b = 0; b < kHoursPerDay; ++b) {
                    acc[a][b] += cm[a][b];
                }
            }
        }
        if (outcomes != nullptr) {
            for (std::size_t k = 0; k < split.targets.size(); ++k) {
                outcomes->push_back({iteration, name, features[split.targets[k]].community_id, truth[k], pred[k],
                                     circular_error_hours(truth[k] / 60.0, pred[k] / 60.0)});
            }
        }
    };

    for (Method m : methods) {
        std::vector<int> pred;
        pred.reserve(split.targets.size());
        for (std::size_t i : split.targets) {
            pred.push_back(run_method(m, features[i], &pool, config).offset_minutes);
        }
        record(std::string(method_name(m)), pred);
    }
    record(std::string(kDummyName), dummy_baseline(ref_offsets, truth.size(), derive_seed(iter_seed, "dummy")));
    return rows;
}

EvalReport run_cv(std::span<const CommunityFeatures> features, std::span<const Method> methods, const SplitPlan& plan,
                  const InferConfig& config) {
    plan.validate();
    EvalReport report;
    for (Method m : methods) {
        report.methods.emplace_back(method_name(m));
    }
    report.methods.emplace_back(kDummyName);

    for (int it = 0; it < plan.iterations; ++it) {
        auto rows = evaluate_iteration(features, methods, plan, it, config, &report.outcomes, &report.confusion);
        report.iterations.insert(report.iterations.end(), rows.begin(), rows.end());
    }

    for (const auto& name : report.methods) {
        Metrics mean;
        double count = 0.0;
        for (const auto& row : report.iterations) {
            if (row.method != name) {
                continue;
            }
            mean.accuracy += row.metrics.accuracy;
            mean.weighted_kappa += row.metrics.weighted_kappa;
            mean.circular_correlation += row.metrics.circular_correlation;
            mean.mean_circular_error += row.metrics.mean_circular_error;
            mean.weighted_f1 += row.metrics.weighted_f1;
            mean.n += row.metrics.n;
            if (!row.metrics.flags.empty() && mean.flags.find(row.metrics.flags) == std::string::npos) {
                mean.flags += mean.flags.empty() ? "" : ";";
                mean.flags += row.metrics.flags;
            }
            count += 1.0;
        }
        mean.accuracy /= count;
        mean.weighted_kappa /= count;
        mean.circular_correlation /= count;
        mean.mean_circular_error /= count;
        mean.weighted_f1 /= count;
        report.aggregates.push_back({name, -1, mean});
    }
    return report;
}

namespace {

std::vector<std::string> metric_fields(const MethodIteration& row, std::string iteration) {
    const auto& m = row.metrics;
    return {row.method,
            std::move(iteration),
            csv::format_double(m.accuracy),
            csv::format_double(m.weighted_kappa),
            csv::format_double(m.circular_correlation),
            csv::format_double(m.mean_circular_error),
            csv::format_double(m.weighted_f1),
            std::to_string(m.n),
            m.flags};
}

}  // namespace

void write_report(const std::filesystem::path& path, const EvalReport& report) {
    csv::Writer w(path);
    w.row({"method", "iteration", "accuracy", "weighted_kappa", "circular_correlation", "mean_circular_error",
           "weighted_f1", "n_targets", "flags"});
    for (const auto& row : report.iterations) {
        w.row(metric_fields(row, std::to_string(row.iteration)));
    }
    for (const auto& row : report.aggregates) {
        w.row(metric_fields(row, "mean"));
    }
    w.close();
}

void write_confusion(const std::filesystem::path& dir, const EvalReport& report) {
    for (const auto& [name, cm] : report.confusion) {
        csv::Writer w(dir / ("confusion_" + name + ".csv"));
        std::vector<std::string> header = {"truth_hour"};
        for (int j = -11; j <= 12; ++j) {
            header.push_back("pred_" + std::to_string(j));
        }
        w.row(header);
        for (int i = 0; i < kHoursPerDay; ++i) {
            std::vector<std::string> row = {std::to_string(i - 11)};
            for (int j = 0; j < kHoursPerDay; ++j) {
                row.push_back(std::to_string(cm[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]));
            }
            w.row(row);
        }
        w.close();
    }
}

void write_outcomes(const std::filesystem::path& path, const EvalReport& report) {
    csv::Writer w(path);
    w.row({"iteration", "method", "community_id", "truth_minutes", "predicted_minutes", "circular_error_hours"});
    for (const auto& o : report.outcomes) {
        w.row({std::to_string(o.iteration), o.method, o.community_id, std::to_string(o.truth_minutes),
               std::to_string(o.predicted_minutes), csv::format_double(o.error_hours)});
    }
    w.close();
}

}  // namespace circtz
