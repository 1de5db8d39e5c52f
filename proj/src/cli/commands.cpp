#include "circtz/cli.hpp"

#include "circtz/analyze.hpp"
#include "circtz/batch.hpp"
#include "circtz/csv.hpp"
#include "circtz/eval.hpp"
#include "circtz/infer.hpp"
#include "circtz/ingest.hpp"
#include "circtz/parallel.hpp"
#include "circtz/rng.hpp"
#include "circtz/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <iostream>

namespace circtz::cli {
namespace fs = std::filesystem;

namespace {

// Knobs shared by every subcommand, after validation.
struct Knobs {
    std::uint64_t seed = 0;
    int jobs = 1;
    FeatureConfig features;
    InferConfig infer;
    int iterations = 10;
    double ref_frac = 0.2;
    std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
    std::optional<SweepAxis> axis;
    std::vector<double> levels;
    bool weight_by_volume = false;
    int base_year = 2012;
    std::size_t min_class_size = 2;

    SplitPlan plan() const {
        SplitPlan p;
        p.iterations = iterations;
        p.reference_fraction = ref_frac;
        // the sweep reuses this seed so its full-data endpoint repeats the evaluate splits
        p.seed = derive_seed(seed, "evaluate");
        return p;
    }
};

struct RawKnobs {
    std::uint64_t seed = 0;
    int jobs = 1;
    int hann_window = 384;
    int min_nonzero = 50;
    double lull_hour = 4.0;
    std::string cwt_band;
    int iterations = 10;
    double ref_frac = 0.2;
    std::vector<std::string> methods;
    std::string axis;
    std::vector<double> levels;
    bool weight_by_volume = false;
    int base_year = 2012;
    std::size_t min_class_size = 2;
    std::string log_level = "info";
};

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
    std::vector<Method> out;
    for (const auto& n : names) {
        const Method m = parse_method(n);
        if (std::find(out.begin(), out.end(), m) == out.end()) {
            out.push_back(m);
        }
    }
    return out;
}

Knobs resolve(const RawKnobs& raw) {
    Knobs k;
    k.seed = raw.seed;
    if (raw.jobs < 1) {
        throw UsageError("--jobs must be >= 1");
    }
    k.jobs = raw.jobs;
    k.features.detrend.window_hours = raw.hann_window;
    k.features.detrend.min_nonzero = raw.min_nonzero;
    k.features.detrend.validate();
    if (!(raw.lull_hour >= 0.0 && raw.lull_hour < 24.0)) {
        throw UsageError("--lull-hour must lie in [0, 24)");
    }
    k.infer.lull_hour = raw.lull_hour;
    if (!raw.cwt_band.empty()) {
        const auto colon = raw.cwt_band.find(':');
        if (colon == std::string::npos) {
            throw UsageError("--cwt-band expects LOW:HIGH in hours, got '" + raw.cwt_band + "'");
        }
        int lo = 0;
        int hi = 0;
        try {
            lo = std::stoi(raw.cwt_band.substr(0, colon));
            hi = std::stoi(raw.cwt_band.substr(colon + 1));
        } catch (const std::exception&) {
            throw UsageError("--cwt-band expects integer hours, got '" + raw.cwt_band + "'");
        }
        if (lo < 2 || hi < lo) {
            throw UsageError("--cwt-band needs 2 <= LOW <= HIGH");
        }
        k.features.cwt.band = std::make_pair(lo, hi);
    }
    k.iterations = raw.iterations;
    k.ref_frac = raw.ref_frac;
    k.plan().validate();
    if (!raw.methods.empty()) {
        k.methods = parse_methods(raw.methods);
    }
    if (!raw.axis.empty()) {
        k.axis = parse_axis(raw.axis);
    }
    k.levels = raw.levels;
    k.weight_by_volume = raw.weight_by_volume;
    k.base_year = raw.base_year;
    if (raw.min_class_size < 1) {
        throw UsageError("--min-class-size must be >= 1");
    }
    k.min_class_size = raw.min_class_size;
    return k;
}

// ---------------------------------------------------------------------------
// small helpers

void merge_into(SeriesMap& dst, SeriesMap src) {
    for (auto& [id, s] : src) {
        auto it = dst.find(id);
        if (it == dst.end()) {
            dst.emplace(id, std::move(s));
            continue;
        }
        ActivitySeries& d = it->second;
        const std::int64_t start = std::min(d.start_hour, s.start_hour);
        const std::int64_t end = std::max(d.end_hour(), s.end_hour());
        std::vector<double> counts(static_cast<std::size_t>(end - start), 0.0);
        for (const ActivitySeries* part : {&d, &s}) {
            for (std::size_t t = 0; t < part->counts.size(); ++t) {
                counts[static_cast<std::size_t>(part->start_hour - start) + t] += part->counts[t];
            }
        }
        d.start_hour = start;
        d.counts = std::move(counts);
    }
}

std::vector<CommunityInfo> community_info(const SeriesMap& series) {
    std::vector<CommunityInfo> out;
    for (const auto& [id, s] : series) {
        std::int64_t first = s.start_hour;
        for (std::size_t t = 0; t < s.counts.size(); ++t) {
            if (s.counts[t] > 0.0) {
                first = s.start_hour + static_cast<std::int64_t>(t);
                break;
            }
        }
        out.push_back({id, s.start_hour, year_of_epoch_hour(first), s.size(), s.total()});
    }
    return out;
}

bool is_feature_file(const fs::path& path) {
    csv::LineReader reader(path);
    const auto line = reader.next();
    return line && line->starts_with("community_id,offset_minutes,start_hour");
}

void write_exclusions(const fs::path& path, std::span<const Exclusion> excluded) {
    csv::Writer w(path);
    w.row({"community_id", "reason"});
    for (const auto& e : excluded) {
        w.row({e.community_id, e.reason});
    }
    w.close();
}

CorpusSpec preset(const std::string& name) {
    CorpusSpec spec = default_corpus_spec(0);
    if (name == "default") {
        return spec;
    }
    if (name == "skewed") {
        return skewed_corpus_spec(0);
    }
    if (name == "noisy") {
        spec.base.phase_jitter_rad = 0.5;
        spec.base.trough_depth = 0.5;
        return spec;
    }
    throw UsageError("unknown synthetic preset '" + name + "'; expected default, skewed or noisy");
}

// ---------------------------------------------------------------------------
// stages

struct SynthArgs {
    std::string spec_path;
    std::string preset = "default";
    std::string events_out;
    std::string series_out;
    std::string labels_out;
};

void synth_stage(const SynthArgs& a, const Knobs& k) {
    if (a.events_out.empty() && a.series_out.empty()) {
        throw UsageError("synth needs --out (events) and/or --series (pre-binned)");
    }
    CorpusSpec spec = a.spec_path.empty() ? preset(a.preset) : read_corpus_spec(a.spec_path);
    const std::uint64_t stage_seed = derive_seed(k.seed, "synth");
    LabeledCorpus corpus;
    if (spec.per_class == 1 && spec.offsets_minutes.size() == 1) {
        SynthSpec single = spec.base;
        single.seed = derive_seed(stage_seed, single.seed);
        auto [series, label] = generate(single);
        corpus.series.emplace(label.community_id, std::move(series));
        corpus.labels.push_back(std::move(label));
    } else {
        spec.seed = derive_seed(stage_seed, spec.seed);
        corpus = generate_corpus(spec);
    }
    spdlog::info("synth: {} communities", corpus.series.size());
    if (!a.events_out.empty()) {
        write_events(a.events_out, corpus.series, derive_seed(k.seed, "events"));
    }
    if (!a.series_out.empty()) {
        write_prebinned(a.series_out, corpus.series);
    }
    if (!a.labels_out.empty()) {
        write_ground_truth(a.labels_out, corpus.labels);
    }
}

struct IngestArgs {
    std::vector<std::string> inputs;
    std::string labels;
    std::string series_out;
    std::string labels_out;
    std::string communities_out;
};

void ingest_stage(const IngestArgs& a, const Knobs& k) {
    SeriesMap series;
    for (const auto& in : a.inputs) {
        merge_into(series, load_series(in));
    }
    spdlog::info("ingest: {} communities from {} file(s)", series.size(), a.inputs.size());
    if (!a.labels.empty()) {
        auto labels = load_ground_truth(a.labels, k.min_class_size);
        const std::size_t n_labels = labels.size();
        auto corpus = make_corpus(std::move(labels), series, k.min_class_size);
        if (corpus.labels.size() != n_labels) {
            spdlog::warn("ingest: {} label(s) dropped (no series or class too small)", n_labels - corpus.labels.size());
        }
        if (!a.labels_out.empty()) {
            write_ground_truth(a.labels_out, corpus.labels);
        }
    } else if (!a.labels_out.empty()) {
        throw UsageError("--labels-out needs --labels");
    }
    if (!a.series_out.empty()) {
        write_prebinned(a.series_out, series);
    }
    if (!a.communities_out.empty()) {
        write_communities(a.communities_out, community_info(series));
    }
}

struct FeaturesArgs {
    std::vector<std::string> inputs;
    std::string labels;
    std::string out;
    std::string exclusions_out;
};

void features_stage(const FeaturesArgs& a, const Knobs& k) {
    SeriesMap series;
    for (const auto& in : a.inputs) {
        merge_into(series, load_series(in));
    }
    std::map<std::string, int> offsets;
    if (!a.labels.empty()) {
        offsets = offsets_by_id(load_ground_truth(a.labels, k.min_class_size));
    }
    const auto batch = compute_batch(series, offsets, k.features, k.jobs);
    spdlog::info("features: {} computed, {} excluded", batch.features.size(), batch.excluded.size());
    write_features(a.out, batch.features);
    if (!a.exclusions_out.empty()) {
        write_exclusions(a.exclusions_out, batch.excluded);
    }
}

std::vector<CommunityFeatures> features_from(const fs::path& input, const std::string& labels, const Knobs& k) {
    if (is_feature_file(input)) {
        return read_features(input);
    }
    std::map<std::string, int> offsets;
    if (!labels.empty()) {
        offsets = offsets_by_id(load_ground_truth(labels, k.min_class_size));
    }
    auto batch = compute_batch(load_series(input), offsets, k.features, k.jobs);
    for (const auto& e : batch.excluded) {
        spdlog::warn("{} excluded: {}", e.community_id, e.reason);
    }
    return std::move(batch.features);
}

struct InferArgs {
    std::string pool;
    std::string input;
    std::string labels;
    std::vector<std::string> methods;
    std::string out;
};

void infer_stage(const InferArgs& a, const Knobs& k) {
    const std::vector<Method> methods = a.methods.empty() ? k.methods : parse_methods(a.methods);
    const bool pool_needed = std::any_of(methods.begin(), methods.end(), needs_pool);
    if (pool_needed && a.pool.empty()) {
        throw UsageError("--pool is required for the reference-matching methods");
    }
    const auto targets = features_from(a.input, a.labels, k);

    std::vector<PoolEntry> entries;
    if (!a.pool.empty()) {
        for (const auto& f : read_features(a.pool)) {
            if (f.offset_minutes) {
                entries.push_back(to_pool_entry(f));
            }
        }
        if (entries.empty() && pool_needed) {
            throw DataError(a.pool + ": no labeled rows to use as references");
        }
    }
    const ReferencePool shared = ReferencePool::from_entries(entries);

    // A target never matches itself: when it also sits in the pool it is left out of its own search.
    std::vector<std::vector<OffsetPrediction>> slots(targets.size());
    parallel_for(targets.size(), k.jobs, [&](std::size_t i) {
        const auto& target = targets[i];
        std::optional<ReferencePool> own;
        const bool in_pool = std::any_of(entries.begin(), entries.end(),
                                         [&](const PoolEntry& e) { return e.community_id == target.community_id; });
        if (in_pool) {
            std::vector<PoolEntry> others;
            for (const auto& e : entries) {
                if (e.community_id != target.community_id) {
                    others.push_back(e);
                }
            }
            own = ReferencePool::from_entries(std::move(others));
        }
        const ReferencePool* pool = a.pool.empty() ? nullptr : (own ? &*own : &shared);
        for (Method m : methods) {
            slots[i].push_back(run_method(m, target, pool, k.infer));
        }
    });
    std::vector<OffsetPrediction> predictions;
    for (auto& s : slots) {
        std::move(s.begin(), s.end(), std::back_inserter(predictions));
    }
    spdlog::info("infer: {} predictions for {} communities", predictions.size(), targets.size());
    write_predictions(a.out, predictions);
}

struct EvaluateArgs {
    std::string input;
    std::string labels;
    std::string out;
    std::string confusion_dir;
    std::string outcomes_out;
};

void evaluate_stage(const EvaluateArgs& a, const Knobs& k) {
    auto features = features_from(a.input, a.labels, k);
    const auto before = features.size();
    std::erase_if(features, [](const CommunityFeatures& f) { return !f.offset_minutes; });
    if (features.size() != before) {
        spdlog::info("evaluate: {} unlabeled communities skipped", before - features.size());
    }
    if (features.empty()) {
        throw DataError(a.input + ": no labeled communities to evaluate");
    }
    const auto report = run_cv(features, k.methods, k.plan(), k.infer);
    write_report(a.out, report);
    const fs::path out_dir = fs::path(a.out).parent_path();
    write_confusion(a.confusion_dir.empty() ? out_dir : fs::path(a.confusion_dir), report);
    write_outcomes(a.outcomes_out.empty() ? out_dir / "outcomes.csv" : fs::path(a.outcomes_out), report);
    for (const auto& m : report.methods) {
        const auto& agg = report.aggregate(m);
        spdlog::info("{:>22}  acc {:.3f}  kappa {:.3f}  rho {:.3f}  mce {:.3f} h", m, agg.accuracy,
                     agg.weighted_kappa, agg.circular_correlation, agg.mean_circular_error);
    }
}

struct SweepArgs {
    std::vector<std::string> inputs;
    std::string labels;
    std::string out;
};

std::vector<double> default_levels(SweepAxis axis) {
    if (axis == SweepAxis::Comments) {
        return {1e6, 1e4, 1e3, 1e2};
    }
    return {1000, 90, 30, 10};
}

void sweep_stage(const SweepArgs& a, SweepAxis axis, const std::vector<double>& levels, const Knobs& k) {
    SeriesMap series;
    for (const auto& in : a.inputs) {
        merge_into(series, load_series(in));
    }
    auto corpus = make_corpus(load_ground_truth(a.labels, k.min_class_size), std::move(series), k.min_class_size);
    SweepOptions opt;
    opt.axis = axis;
    opt.levels = levels.empty() ? default_levels(axis) : levels;
    opt.plan = k.plan();
    opt.features = k.features;
    opt.infer = k.infer;
    opt.jobs = k.jobs;
    const auto rows = scarcity_sweep(corpus, k.methods, opt);
    spdlog::info("sweep ({}): {} rows", axis_name(axis), rows.size());
    write_sweep(a.out, rows);
}

struct AnalyzeArgs {
    std::string predictions;
    std::string communities;
    std::string method = "ActivityCounts";
    std::string population;
    std::string labels;
    std::string offset_table;
    std::string out_dir;
};

struct OffsetTable {
    HourVector real{};
    HourVector pure{};
    HourVector optimized{};
};

OffsetTable read_offset_table(const fs::path& path) {
    const auto table = csv::read_table(path);
    const auto c_off = table.column("offset_hours", path);
    const auto c_real = table.column("real_users_pct", path);
    const auto c_pure = table.column("inferred_pure_pct", path);
    const auto c_opt = table.find_column("inferred_optimized_pct");
    OffsetTable t;
    for (const auto& row : table.rows) {
        const int h = static_cast<int>(csv::parse_int(row[c_off], "offset_hours"));
        if (h < -11 || h > 12) {
            throw DataError(path.string() + ": offset_hours out of range: " + row[c_off]);
        }
        const auto i = static_cast<std::size_t>(hour_class_index(h));
        t.real[i] = csv::parse_double(row[c_real], "real_users_pct");
        t.pure[i] = csv::parse_double(row[c_pure], "inferred_pure_pct");
        if (c_opt) {
            t.optimized[i] = csv::parse_double(row[*c_opt], "inferred_optimized_pct");
        }
    }
    return t;
}

HourVector shares(const HourVector& v) {
    double total = 0.0;
    for (double x : v) {
        total += x;
    }
    HourVector out{};
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = total > 0.0 ? v[i] / total : 0.0;
    }
    return out;
}

HourVector label_distribution(const fs::path& path, std::size_t min_class_size) {
    HourVector out{};
    for (const auto& l : load_ground_truth(path, min_class_size)) {
        out[static_cast<std::size_t>(hour_class_index(offset_to_hour_class(l.offset_minutes)))] += 1.0;
    }
    return out;
}

nlohmann::ordered_json write_deconvolution(const fs::path& path, const HourVector& pure, const HourVector& real) {
    const auto result = deconvolve(pure, real);
    const HourVector p = shares(pure);
    const HourVector r = shares(real);
    csv::Writer w(path);
    w.row({"offset_hours", "theta", "weight", "pure_share", "real_share", "optimized_share"});
    for (std::size_t i = 0; i < kShiftHours.size(); ++i) {
        w.row({std::to_string(kShiftHours[i]), csv::format_double(result.theta[i]),
               csv::format_double(result.weights[i]), csv::format_double(p[i]), csv::format_double(r[i]),
               csv::format_double(result.optimized[i])});
    }
    w.close();
    const auto before = population_correlation(pure, real);
    if (!result.converged) {
        spdlog::warn("deconvolution did not converge; best feasible iterate reported");
    }
    spdlog::info("deconvolution: pearson {:.4f} -> {:.4f}", before.pearson, result.pearson);
    nlohmann::ordered_json j;
    j["pearson_before"] = before.pearson;
    j["spearman_before"] = before.spearman;
    j["pearson"] = result.pearson;
    j["spearman"] = result.spearman;
    j["objective"] = result.objective;
    j["converged"] = result.converged;
    j["iterations"] = result.iterations;
    j["sum_residual"] = result.sum_residual;
    j["barycenter_residual"] = result.barycenter_residual;
    return j;
}

void analyze_stage(const AnalyzeArgs& a, const Knobs& k) {
    const fs::path dir = a.out_dir;
    nlohmann::ordered_json summary;
    const int sources = (a.population.empty() ? 0 : 1) + (a.labels.empty() ? 0 : 1) + (a.offset_table.empty() ? 0 : 1);
    if (sources > 1) {
        throw UsageError("pick one of --population, --labels and --offset-table");
    }
    if (a.predictions.empty() != a.communities.empty()) {
        throw UsageError("--predictions and --communities go together");
    }
    if (a.predictions.empty() && a.offset_table.empty()) {
        throw UsageError("analyze needs --predictions/--communities or --offset-table");
    }

    if (!a.offset_table.empty()) {
        const auto t = read_offset_table(a.offset_table);
        summary["offset_table"] = write_deconvolution(dir / "deconvolution.csv", t.pure, t.real);
    }

    if (!a.predictions.empty()) {
        const Method method = parse_method(a.method);
        std::vector<OffsetPrediction> predictions;
        for (auto& p : read_predictions(a.predictions)) {
            if (p.method == method) {
                predictions.push_back(std::move(p));
            }
        }
        if (predictions.empty()) {
            throw DataError(a.predictions + ": no predictions for method " + a.method);
        }
        const auto communities = read_communities(a.communities);
        const auto yearly = yearly_distribution(predictions, communities, k.weight_by_volume);
        summary["method"] = a.method;
        summary["n_predictions"] = predictions.size();
        summary["weight_by_volume"] = k.weight_by_volume;

        HourVector pooled{};
        csv::Writer density(dir / "density_by_year.csv");
        density.row({"year", "offset_hours", "mass", "share"});
        csv::Writer gini_out(dir / "gini_by_year.csv");
        gini_out.row({"year", "total", "gini"});
        for (const auto& y : yearly) {
            const HourVector bins = y.hour_bins();
            const double total = y.total();
            for (std::size_t i = 0; i < bins.size(); ++i) {
                pooled[i] += bins[i];
                density.row({std::to_string(y.year), std::to_string(kShiftHours[i]), csv::format_double(bins[i]),
                             csv::format_double(total > 0.0 ? bins[i] / total : 0.0)});
            }
            if (total > 0.0) {
                gini_out.row({std::to_string(y.year), csv::format_double(total), csv::format_double(gini(bins))});
            }
        }
        density.close();
        gini_out.close();

        csv::Writer growth(dir / "growth_heatmap.csv");
        growth.row({"year", "offset_hours", "log2_fold_change"});
        const bool has_base =
            std::any_of(yearly.begin(), yearly.end(), [&](const auto& y) { return y.year == k.base_year; });
        if (has_base) {
            for (const auto& cell : growth_index(yearly, k.base_year)) {
                growth.row({std::to_string(cell.year), std::to_string(cell.offset_hours),
                            csv::format_double(cell.log2_fold_change)});
            }
        } else {
            spdlog::warn("base year {} has no communities; growth heatmap left empty", k.base_year);
            summary["growth_flag"] = "base_year_missing";
        }
        growth.close();

        std::optional<HourVector> real;
        if (!a.population.empty()) {
            real = read_population(a.population);
        } else if (!a.labels.empty()) {
            real = label_distribution(a.labels, k.min_class_size);
        }
        if (real) {
            const auto corr = population_correlation(pooled, *real);
            summary["population"] = {{"pearson", corr.pearson}, {"spearman", corr.spearman}};
            summary["deconvolution"] = write_deconvolution(dir / "deconvolution.csv", pooled, *real);
        }
    }

    fs::create_directories(dir);
    std::ofstream out(dir / "summary.json");
    out << summary.dump(2) << '\n';
    if (!out) {
        throw DataError("failed writing " + (dir / "summary.json").string());
    }
}

struct PipelineArgs {
    std::string synthetic;
    std::vector<std::string> inputs;
    std::string labels;
    std::string population;
    std::string out = "out";
    bool no_sweep = false;
};

void pipeline_stage(const PipelineArgs& a, const Knobs& k) {
    if (a.synthetic.empty() == a.inputs.empty()) {
        throw UsageError("pipeline needs exactly one of --synthetic and --input");
    }
    if (!a.inputs.empty() && a.labels.empty()) {
        throw UsageError("pipeline on real inputs needs --labels");
    }
    const fs::path out = a.out;
    std::vector<std::string> inputs = a.inputs;
    std::string labels = a.labels;
    if (!a.synthetic.empty()) {
        SynthArgs s;
        s.preset = a.synthetic;
        s.series_out = (out / "synth" / "series.csv").string();
        s.labels_out = (out / "synth" / "labels.csv").string();
        synth_stage(s, k);
        inputs = {s.series_out};
        labels = s.labels_out;
    }

    IngestArgs ingest{inputs, labels, (out / "ingest" / "series.csv").string(),
                      (out / "ingest" / "labels.csv").string(), (out / "ingest" / "communities.csv").string()};
    ingest_stage(ingest, k);

    FeaturesArgs features{{ingest.series_out}, ingest.labels_out, (out / "features" / "features.csv").string(),
                          (out / "features" / "exclusions.csv").string()};
    features_stage(features, k);

    EvaluateArgs evaluate{features.out, "", (out / "evaluate" / "report.csv").string(), "", ""};
    evaluate_stage(evaluate, k);

    InferArgs infer{features.out, features.out, "", {}, (out / "infer" / "predictions.csv").string()};
    infer_stage(infer, k);

    if (!a.no_sweep) {
        std::vector<SweepAxis> axes = {SweepAxis::Comments, SweepAxis::Days};
        if (k.axis) {
            axes = {*k.axis};
        }
        for (SweepAxis axis : axes) {
            SweepArgs sweep{{ingest.series_out},
                            ingest.labels_out,
                            (out / "sweep" / ("sweep_" + std::string(axis_name(axis)) + ".csv")).string()};
            sweep_stage(sweep, axis, k.axis ? k.levels : std::vector<double>{}, k);
        }
    }

    AnalyzeArgs analyze;
    analyze.predictions = infer.out;
    analyze.communities = ingest.communities_out;
    if (!a.population.empty()) {
        analyze.population = a.population;
    } else {
        analyze.labels = ingest.labels_out;
    }
    analyze.out_dir = (out / "analyze").string();
    analyze_stage(analyze, k);
}

void configure_logging(const std::string& level) {
    static const auto logger = [] {
        auto l = spdlog::stderr_color_mt("circtz");
        spdlog::set_default_logger(l);
        spdlog::set_pattern("[%l] %v");
        return l;
    }();
    const auto lvl = spdlog::level::from_str(level);
    if (lvl == spdlog::level::off && level != "off") {
        throw UsageError("unknown --log-level '" + level + "'");
    }
    logger->set_level(lvl);
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"circtz: infer the UTC offset of online communities from hourly activity"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Flat key=value file of option overrides");

    RawKnobs raw;
    app.add_option("--seed", raw.seed, "Root seed; every stage derives its own")->envname("CIRCTZ_SEED");
    app.add_option("--jobs", raw.jobs, "Worker threads over communities");
    app.add_option("--log-level", raw.log_level, "trace, debug, info, warn, error or off");
    app.add_option("--hann-window", raw.hann_window, "Detrending window in hours");
    app.add_option("--min-nonzero", raw.min_nonzero, "Minimum number of non-zero hours");
    app.add_option("--lull-hour", raw.lull_hour, "Local hour of the activity lull");
    app.add_option("--cwt-band", raw.cwt_band, "Average wavelet power over periods LOW:HIGH hours");
    app.add_option("--iterations", raw.iterations, "Cross-validation iterations");
    app.add_option("--ref-frac", raw.ref_frac, "Reference share of each class per split");
    app.add_option("--methods", raw.methods, "Comma-separated method names")->delimiter(',');
    app.add_option("--axis", raw.axis, "Sweep axis: comments or days");
    app.add_option("--levels", raw.levels, "Comma-separated sweep levels, descending")->delimiter(',');
    app.add_flag("--weight-by-volume", raw.weight_by_volume, "Weight yearly densities by event volume");
    app.add_option("--base-year", raw.base_year, "Base year of the growth index");
    app.add_option("--min-class-size", raw.min_class_size, "Smallest offset class kept from the labels");

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic corpus");
    synth_cmd->add_option("--spec", synth.spec_path, "JSON spec (single community or corpus)")
        ->check(CLI::ExistingFile);
    synth_cmd->add_option("--preset", synth.preset, "Built-in corpus when no --spec: default, skewed or noisy");
    synth_cmd->add_option("--out", synth.events_out, "Event file (.ndjson, .jsonl or .csv, optional .gz)");
    synth_cmd->add_option("--series", synth.series_out, "Pre-binned series CSV");
    synth_cmd->add_option("--labels", synth.labels_out, "Ground-truth CSV");

    IngestArgs ingest;
    auto* ingest_cmd = app.add_subcommand("ingest", "Bin events into hourly series and check labels");
    ingest_cmd->add_option("--input", ingest.inputs, "Event or pre-binned files")
        ->required()
        ->check(CLI::ExistingFile);
    ingest_cmd->add_option("--labels", ingest.labels, "Ground-truth CSV")->check(CLI::ExistingFile);
    ingest_cmd->add_option("--out", ingest.series_out, "Pre-binned series CSV")->required();
    ingest_cmd->add_option("--labels-out", ingest.labels_out, "Filtered ground truth");
    ingest_cmd->add_option("--communities", ingest.communities_out, "Per-community summary CSV");

    FeaturesArgs features;
    auto* features_cmd = app.add_subcommand("features", "Compute profile, GAM and wavelet features");
    features_cmd->add_option("--input", features.inputs, "Event or pre-binned files")
        ->required()
        ->check(CLI::ExistingFile);
    features_cmd->add_option("--labels", features.labels, "Ground-truth CSV")->check(CLI::ExistingFile);
    features_cmd->add_option("--out", features.out, "Feature CSV")->required();
    features_cmd->add_option("--exclusions", features.exclusions_out, "CSV of skipped communities");

    InferArgs infer;
    auto* infer_cmd = app.add_subcommand("infer", "Predict offsets with one or more methods");
    infer_cmd->add_option("--method", infer.methods, "Method name(s); defaults to --methods")->delimiter(',');
    infer_cmd->add_option("--pool", infer.pool, "Labeled feature CSV used as references")->check(CLI::ExistingFile);
    infer_cmd->add_option("--input", infer.input, "Targets: feature CSV or series file")
        ->required()
        ->check(CLI::ExistingFile);
    infer_cmd->add_option("--labels", infer.labels, "Ground truth for series input")->check(CLI::ExistingFile);
    infer_cmd->add_option("--out", infer.out, "Predictions CSV")->required();

    EvaluateArgs evaluate;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Repeated stratified evaluation of the methods");
    evaluate_cmd->add_option("--input", evaluate.input, "Labeled feature CSV or series file")
        ->required()
        ->check(CLI::ExistingFile);
    evaluate_cmd->add_option("--labels", evaluate.labels, "Ground truth for series input")
        ->check(CLI::ExistingFile);
    evaluate_cmd->add_option("--out", evaluate.out, "Report CSV")->required();
    evaluate_cmd->add_option("--confusion-dir", evaluate.confusion_dir, "Where confusion_<method>.csv go");
    evaluate_cmd->add_option("--outcomes", evaluate.outcomes_out, "Per-target outcome CSV");

    SweepArgs sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Accuracy under reduced comments or days");
    sweep_cmd->add_option("--input", sweep.inputs, "Event or pre-binned files")
        ->required()
        ->check(CLI::ExistingFile);
    sweep_cmd->add_option("--labels", sweep.labels, "Ground-truth CSV")->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--out", sweep.out, "Sweep CSV")->required();

    AnalyzeArgs analyze;
    auto* analyze_cmd = app.add_subcommand("analyze", "Yearly densities, Gini, growth and deconvolution");
    analyze_cmd->add_option("--predictions", analyze.predictions, "Predictions CSV")->check(CLI::ExistingFile);
    analyze_cmd->add_option("--communities", analyze.communities, "Community summary CSV from ingest")
        ->check(CLI::ExistingFile);
    analyze_cmd->add_option("--method", analyze.method, "Which method's predictions to analyze");
    analyze_cmd->add_option("--population", analyze.population, "External offset_minutes,real_share CSV")
        ->check(CLI::ExistingFile);
    analyze_cmd->add_option("--labels", analyze.labels, "Use the ground-truth distribution as the real side")
        ->check(CLI::ExistingFile);
    analyze_cmd->add_option("--offset-table", analyze.offset_table, "Deconvolve a shipped real/inferred table")
        ->check(CLI::ExistingFile);
    analyze_cmd->add_option("--out-dir", analyze.out_dir, "Output directory")->required();

    PipelineArgs pipeline;
    auto* pipeline_cmd = app.add_subcommand("pipeline", "Every stage in sequence");
    pipeline_cmd->add_option("--synthetic", pipeline.synthetic, "Built-in corpus: default, skewed or noisy");
    pipeline_cmd->add_option("--input", pipeline.inputs, "Event or pre-binned files")->check(CLI::ExistingFile);
    pipeline_cmd->add_option("--labels", pipeline.labels, "Ground-truth CSV")->check(CLI::ExistingFile);
    pipeline_cmd->add_option("--population", pipeline.population, "External offset_minutes,real_share CSV")
        ->check(CLI::ExistingFile);
    pipeline_cmd->add_option("--out", pipeline.out, "Output directory");
    pipeline_cmd->add_flag("--no-sweep", pipeline.no_sweep, "Skip the scarcity sweeps");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        configure_logging(raw.log_level);
        const Knobs k = resolve(raw);
        if (synth_cmd->parsed()) {
            synth_stage(synth, k);
        } else if (ingest_cmd->parsed()) {
            ingest_stage(ingest, k);
        } else if (features_cmd->parsed()) {
            features_stage(features, k);
        } else if (infer_cmd->parsed()) {
            infer_stage(infer, k);
        } else if (evaluate_cmd->parsed()) {
            evaluate_stage(evaluate, k);
        } else if (sweep_cmd->parsed()) {
            if (!k.axis) {
                throw UsageError("sweep needs --axis comments or --axis days");
            }
            sweep_stage(sweep, *k.axis, k.levels, k);
        } else if (analyze_cmd->parsed()) {
            analyze_stage(analyze, k);
        } else if (pipeline_cmd->parsed()) {
            pipeline_stage(pipeline, k);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace circtz::cli
