#pragma once

// Experiment protocols: single-model open-world attribution, closed-world
// multi-model attribution, training-free detection, and noise robustness.
//
// All randomness flows from named seeds derived per (trial, purpose, label),
// so reports are bit-reproducible for a given (manifest, config, seed) and
// independent of worker count. Trials t = 0..T-1 run with seed+t and are
// reported as mean with sample standard deviation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "afp/audio.hpp"
#include "afp/error.hpp"
#include "afp/fingerprint.hpp"
#include "afp/fir.hpp"
#include "afp/manifest.hpp"
#include "afp/metrics.hpp"
#include "afp/parallel.hpp"
#include "afp/rng.hpp"
#include "afp/scoring.hpp"
#include "afp/spectrum.hpp"

namespace afp {

/// Residual extraction method: a designed spectral filter or an external
/// pre-filtering step (e.g. a neural codec) identified by tag. External
/// methods expect a pre-filtered companion file `<stem>.<tag><ext>` next to
/// each clip.
struct FilterMethod {
    bool external = false;
    std::string tag;
    FilterSpec spec{};

    std::string describe() const {
        return external ? "external:" + tag : spec.describe();
    }
};

/// Flag grammar: `external:<tag>`, `lowpass:<edge>:<stop_edge>`,
/// `highpass:<edge>:<stop_edge>`, `bandpass:<lo>:<hi>[:<transition>]`,
/// `bandstop:<lo>:<hi>[:<transition>]`. For pass kinds the last field is the
/// absolute frequency where the stopband begins; for band kinds it is the
/// transition width (default 500 Hz). All values in Hz.
inline FilterMethod parse_filter_method(const std::string& flag) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const std::size_t colon = flag.find(':', start);
        if (colon == std::string::npos) {
            parts.push_back(flag.substr(start));
            break;
        }
        parts.push_back(flag.substr(start, colon - start));
        start = colon + 1;
    }
    require(!parts.empty() && !parts[0].empty(),
            "invalid filter flag: '" + flag + "'");

    FilterMethod method;
    if (parts[0] == "external") {
        require(parts.size() == 2 && !parts[1].empty(),
                "invalid filter flag: '" + flag +
                    "' (expected external:<tag>)");
        method.external = true;
        method.tag = parts[1];
        return method;
    }

    const FilterKind kind = filter_kind_from_string(parts[0]);
    auto to_hz = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            require(used == s.size() && std::isfinite(v) && v > 0.0,
                    "invalid frequency in filter flag: '" + s + "'");
            return v;
        } catch (const std::logic_error&) {
            throw Error("invalid frequency in filter flag: '" + s + "'");
        }
    };
    method.spec.kind = kind;
    method.spec.stopband_atten_db = 60.0;
    if (kind == FilterKind::low_pass || kind == FilterKind::high_pass) {
        require(parts.size() == 3, "invalid filter flag: '" + flag +
                                       "' (expected kind:edge:stop_edge)");
        method.spec.edge_lo = to_hz(parts[1]);
        const double stop_edge = to_hz(parts[2]);
        const double tw = kind == FilterKind::low_pass
                              ? stop_edge - method.spec.edge_lo
                              : method.spec.edge_lo - stop_edge;
        require(tw > 0.0, "invalid filter flag: '" + flag +
                              "' (stopband edge on the wrong side of the "
                              "cutoff)");
        method.spec.transition_width = tw;
    } else {
        require(parts.size() == 3 || parts.size() == 4,
                "invalid filter flag: '" + flag +
                    "' (expected kind:lo:hi[:transition])");
        method.spec.edge_lo = to_hz(parts[1]);
        method.spec.edge_hi = to_hz(parts[2]);
        method.spec.transition_width =
            parts.size() == 4 ? to_hz(parts[3]) : 500.0;
    }
    return method;
}

/// Flag grammar `window_len:hop`, e.g. `128:2`.
inline StftConfig parse_stft_flag(const std::string& flag,
                                  WindowKind window = WindowKind::hann) {
    const std::size_t colon = flag.find(':');
    require(colon != std::string::npos && colon > 0 &&
                colon + 1 < flag.size(),
            "invalid stft flag: '" + flag + "' (expected window_len:hop)");
    StftConfig config;
    try {
        config.window_len = std::stoi(flag.substr(0, colon));
        config.hop = std::stoi(flag.substr(colon + 1));
    } catch (const std::logic_error&) {
        throw Error("invalid stft flag: '" + flag + "'");
    }
    config.window_kind = window;
    config.validate();
    return config;
}

inline std::filesystem::path companion_path(const std::filesystem::path& clip,
                                            const std::string& tag) {
    std::filesystem::path p = clip;
    const std::string ext = p.extension().string();
    p.replace_extension();
    p += "." + tag + ext;
    return p;
}

/// Memoized per-entry residual computation over a manifest, parallel within
/// each ensure() batch. The FIR filter is designed once at the sample rate of
/// the first computed entry; every other entry must match it.
class LazyResiduals {
public:
    LazyResiduals(
        const Manifest& manifest, FilterMethod method, StftConfig stft,
        unsigned jobs,
        std::function<AudioSignal(AudioSignal&&, std::size_t)> transform = {})
        : manifest_(manifest), method_(std::move(method)), stft_(stft),
          jobs_(jobs), transform_(std::move(transform)),
          memo_(manifest.entries.size()) {
        stft_.validate();
    }

    void ensure(const std::vector<std::size_t>& indices) {
        std::vector<std::size_t> missing;
        for (std::size_t i : indices) {
            require(i < memo_.size(), "LazyResiduals: index out of range");
            if (!memo_[i]) {
                missing.push_back(i);
            }
        }
        if (missing.empty()) {
            return;
        }
        if (rate_ == 0) {
            const AudioSignal first =
                load_wav(manifest_.resolve(manifest_.entries[missing.front()]));
            rate_ = first.sample_rate;
            if (method_.external) {
                info_ = FilterInfo::from_tag(method_.tag);
            } else {
                designed_ = design_fir(method_.spec, rate_);
                info_ = FilterInfo::from_filter(*designed_);
            }
        }
        parallel_for(missing.size(), jobs_, [&](std::size_t k) {
            memo_[missing[k]] = compute(missing[k]);
        });
    }

    void ensure_all() {
        std::vector<std::size_t> all(memo_.size());
        for (std::size_t i = 0; i < all.size(); ++i) {
            all[i] = i;
        }
        ensure(all);
    }

    const ResidualVector& at(std::size_t i) const {
        require(i < memo_.size() && memo_[i].has_value(),
                "LazyResiduals: residual not computed");
        return *memo_[i];
    }

    const FilterInfo& filter_info() const {
        require(info_.has_value(), "LazyResiduals: nothing computed yet");
        return *info_;
    }

    int sample_rate() const { return rate_; }

private:
    ResidualVector compute(std::size_t i) const {
        const std::filesystem::path path =
            manifest_.resolve(manifest_.entries[i]);
        AudioSignal signal = load_wav(path);
        if (signal.sample_rate != rate_) {
            throw Error("sample-rate mismatch: " + path.string() + " is " +
                        std::to_string(signal.sample_rate) + " Hz, corpus is " +
                        std::to_string(rate_) + " Hz (no resampling)");
        }
        if (transform_) {
            signal = transform_(std::move(signal), i);
        }
        if (method_.external) {
            const std::filesystem::path comp =
                companion_path(path, method_.tag);
            if (!std::filesystem::exists(comp)) {
                throw IoError("missing external companion '" + comp.string() +
                              "' for " + path.string());
            }
            const AudioSignal filtered = load_wav(comp);
            return residual_from_pair(signal, filtered, stft_, method_.tag);
        }
        return residual(signal, *designed_, stft_);
    }

    const Manifest& manifest_;
    FilterMethod method_;
    StftConfig stft_;
    unsigned jobs_;
    std::function<AudioSignal(AudioSignal&&, std::size_t)> transform_;
    std::vector<std::optional<ResidualVector>> memo_;
    std::optional<FirFilter> designed_;
    std::optional<FilterInfo> info_;
    int rate_ = 0;
};

struct Table {
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::vector<std::vector<double>> mean;  // [row][col]
    std::vector<std::vector<double>> stdev; // [row][col]
};

struct EvalReport {
    std::string task;
    std::uint64_t seed = 0;
    int trials = 1;
    nlohmann::json config_echo;
    std::map<std::string, double> metrics;
    std::map<std::string, Table> tables;
    std::vector<std::pair<double, double>> curve; // (snr_db, auroc)

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["format_version"] = 1;
        j["task"] = task;
        j["seed"] = seed;
        j["trials"] = trials;
        j["config"] = config_echo;
        j["metrics"] = metrics;
        nlohmann::json tables_json;
        for (const auto& [name, table] : tables) {
            nlohmann::json t;
            t["rows"] = table.row_labels;
            t["cols"] = table.col_labels;
            t["mean"] = table.mean;
            t["std"] = table.stdev;
            tables_json[name] = t;
        }
        j["tables"] = tables_json;
        if (!curve.empty()) {
            nlohmann::json c = nlohmann::json::array();
            for (const auto& [snr, value] : curve) {
                c.push_back({snr, value});
            }
            j["curve"] = c;
        }
        return j;
    }

    std::string render_text() const;
};

namespace detail {

class Aggregate {
public:
    void add(double x) {
        values_.push_back(x);
    }
    double mean() const {
        double s = 0.0;
        for (double v : values_) {
            s += v;
        }
        return values_.empty() ? 0.0 : s / static_cast<double>(values_.size());
    }
    double stdev() const {
        if (values_.size() < 2) {
            return 0.0;
        }
        const double m = mean();
        double s = 0.0;
        for (double v : values_) {
            s += (v - m) * (v - m);
        }
        return std::sqrt(s / static_cast<double>(values_.size() - 1));
    }

private:
    std::vector<double> values_;
};

struct LabelIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

inline std::map<std::string, LabelIndices>
collect_splits(const Manifest& manifest) {
    std::map<std::string, LabelIndices> out;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        const ManifestEntry& e = manifest.entries[i];
        LabelIndices& li = out[e.label];
        switch (e.split) {
        case Split::train:
            li.train.push_back(i);
            break;
        case Split::val:
            li.val.push_back(i);
            break;
        case Split::test:
            li.test.push_back(i);
            break;
        case Split::none:
            break;
        }
    }
    return out;
}

inline Fingerprint fingerprint_from_indices(
    const std::string& label, const std::vector<std::size_t>& indices,
    const LazyResiduals& residuals, std::optional<double> shrinkage) {
    std::vector<ResidualVector> rs;
    rs.reserve(indices.size());
    for (std::size_t i : indices) {
        rs.push_back(residuals.at(i));
    }
    return estimate_fingerprint(label, rs, shrinkage,
                                residuals.filter_info());
}

/// Oriented score for AUROC: higher must mean "more target-like".
inline double oriented_score(const ResidualVector& r, const Fingerprint& fp,
                             ScoreKind kind) {
    return kind == ScoreKind::correlation ? correlation_score(r, fp)
                                          : -mahalanobis_score(r, fp);
}

inline std::vector<std::string>
synthetic_labels(const Manifest& manifest) {
    std::vector<std::string> labels;
    for (const std::string& l : manifest.labels()) {
        if (l != "real") {
            labels.push_back(l);
        }
    }
    return labels;
}

/// Source ordering for report rows: synthetic systems sorted, then "real".
inline std::vector<std::string> ordered_sources(std::vector<std::string> all,
                                                const std::string& target) {
    std::vector<std::string> out;
    bool has_real = false;
    for (const std::string& l : all) {
        if (l == target) {
            continue;
        }
        if (l == "real") {
            has_real = true;
        } else {
            out.push_back(l);
        }
    }
    if (has_real) {
        out.push_back("real");
    }
    return out;
}

/// Balance to `n` entries: seeded subsample when larger, seeded resample
/// with replacement when smaller.
inline std::vector<std::size_t> balance_to(const std::vector<std::size_t>& v,
                                           std::size_t n, Rng& rng) {
    if (v.size() == n) {
        return v;
    }
    if (v.size() > n) {
        return rng.sample(v, n);
    }
    std::vector<std::size_t> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.push_back(v[static_cast<std::size_t>(rng.below(v.size()))]);
    }
    return out;
}

} // namespace detail

/// Open-world single-model attribution (one target, balanced pairwise AUROC
/// against every other source). Entries without a preassigned split get a
/// per-trial stratified 80/20 train/test split; preassigned splits (e.g.
/// eval-only sources) are honored as-is.
inline EvalReport single_model_experiment(
    const Manifest& manifest, const std::string& target_label,
    const FilterMethod& method, const StftConfig& stft, ScoreKind kind,
    std::uint64_t seed, int trials = 5, unsigned jobs = 0) {
    require(trials >= 1, "single_model_experiment: trials must be >= 1");
    const std::vector<std::string> all_labels = manifest.labels();
    require(std::find(all_labels.begin(), all_labels.end(), target_label) !=
                all_labels.end(),
            "single_model_experiment: target label '" + target_label +
                "' not found in manifest");
    require(all_labels.size() >= 2,
            "single_model_experiment: need at least one non-target source");

    LazyResiduals residuals(manifest, method, stft, jobs);
    residuals.ensure_all();

    const std::vector<std::string> sources =
        detail::ordered_sources(all_labels, target_label);
    std::map<std::string, detail::Aggregate> per_source;
    detail::Aggregate average;

    for (int t = 0; t < trials; ++t) {
        const std::uint64_t trial_seed = seed + static_cast<std::uint64_t>(t);
        const Manifest split =
            split_manifest(manifest, {0.8, 0.0, 0.2}, trial_seed, true);
        const auto by_label = detail::collect_splits(split);

        const detail::LabelIndices& target = by_label.at(target_label);
        require(!target.train.empty(),
                "single_model_experiment: target '" + target_label +
                    "' has no training clips");
        require(!target.test.empty(),
                "single_model_experiment: target '" + target_label +
                    "' has no test clips");
        const Fingerprint fp = detail::fingerprint_from_indices(
            target_label, target.train, residuals, std::nullopt);

        double auroc_sum = 0.0;
        for (const std::string& source : sources) {
            const detail::LabelIndices& src = by_label.at(source);
            require(!src.test.empty(), "single_model_experiment: source '" +
                                           source + "' has no test clips");
            const std::size_t n =
                std::min(target.test.size(), src.test.size());
            Rng rng(derive_seed(trial_seed, "balance:" + source));
            const std::vector<std::size_t> pos = rng.sample(target.test, n);
            const std::vector<std::size_t> neg = rng.sample(src.test, n);

            std::vector<double> scores;
            std::vector<std::uint8_t> labels;
            scores.reserve(2 * n);
            labels.reserve(2 * n);
            for (std::size_t i : pos) {
                scores.push_back(
                    detail::oriented_score(residuals.at(i), fp, kind));
                labels.push_back(1);
            }
            for (std::size_t i : neg) {
                scores.push_back(
                    detail::oriented_score(residuals.at(i), fp, kind));
                labels.push_back(0);
            }
            const double a = auroc(scores, labels);
            per_source[source].add(a);
            auroc_sum += a;
        }
        average.add(auroc_sum / static_cast<double>(sources.size()));
    }

    EvalReport report;
    report.task = "single_model";
    report.seed = seed;
    report.trials = trials;
    report.config_echo = {{"target", target_label},
                          {"filter", method.describe()},
                          {"stft", stft.describe()},
                          {"score", to_string(kind)}};
    Table table;
    table.col_labels = {target_label};
    for (const std::string& source : sources) {
        table.row_labels.push_back(source);
        table.mean.push_back({per_source.at(source).mean()});
        table.stdev.push_back({per_source.at(source).stdev()});
    }
    table.row_labels.push_back("Avg.");
    table.mean.push_back({average.mean()});
    table.stdev.push_back({average.stdev()});
    report.tables["auroc"] = table;
    report.metrics["average_auroc"] = average.mean();
    report.metrics["average_auroc_std"] = average.stdev();
    return report;
}

/// Closed-world multi-model attribution by minimum Mahalanobis distance over
/// per-system fingerprints; macro metrics on a class-balanced test pool.
inline EvalReport closed_world_experiment(const Manifest& manifest,
                                          const FilterMethod& method,
                                          const StftConfig& stft,
                                          std::uint64_t seed, int trials = 5,
                                          unsigned jobs = 0) {
    require(trials >= 1, "closed_world_experiment: trials must be >= 1");
    const std::vector<std::string> labels = detail::synthetic_labels(manifest);
    require(labels.size() >= 2,
            "closed_world_experiment: need at least 2 synthetic labels, got " +
                std::to_string(labels.size()));

    LazyResiduals residuals(manifest, method, stft, jobs);
    std::vector<std::size_t> synthetic_indices;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        if (manifest.entries[i].label != "real") {
            synthetic_indices.push_back(i);
        }
    }
    residuals.ensure(synthetic_indices);

    detail::Aggregate acc_accuracy, acc_f1, acc_precision, acc_recall;
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t trial_seed = seed + static_cast<std::uint64_t>(t);
        const Manifest split =
            split_manifest(manifest, {0.8, 0.1, 0.1}, trial_seed, true);
        const auto by_label = detail::collect_splits(split);

        std::vector<Fingerprint> fps;
        std::size_t min_test = std::numeric_limits<std::size_t>::max();
        for (const std::string& label : labels) {
            const detail::LabelIndices& li = by_label.at(label);
            require(!li.train.empty() && !li.test.empty(),
                    "closed_world_experiment: label '" + label +
                        "' too small to split");
            fps.push_back(detail::fingerprint_from_indices(
                label, li.train, residuals, std::nullopt));
            min_test = std::min(min_test, li.test.size());
        }

        std::vector<std::string> predictions;
        std::vector<std::string> truths;
        for (const std::string& label : labels) {
            Rng rng(derive_seed(trial_seed, "closed-balance:" + label));
            const std::vector<std::size_t> test =
                rng.sample(by_label.at(label).test, min_test);
            for (std::size_t i : test) {
                const AttributionResult r = attribute_multi(
                    residuals.at(i), fps, ScoreKind::mahalanobis);
                predictions.push_back(r.predicted_label);
                truths.push_back(label);
            }
        }
        const MacroMetrics m = macro_metrics(predictions, truths);
        acc_accuracy.add(m.accuracy);
        acc_f1.add(m.f1);
        acc_precision.add(m.precision);
        acc_recall.add(m.recall);
    }

    EvalReport report;
    report.task = "closed_world";
    report.seed = seed;
    report.trials = trials;
    report.config_echo = {{"filter", method.describe()},
                          {"stft", stft.describe()},
                          {"score", "mahalanobis"},
                          {"labels", labels}};
    report.metrics["accuracy"] = acc_accuracy.mean();
    report.metrics["accuracy_std"] = acc_accuracy.stdev();
    report.metrics["f1"] = acc_f1.mean();
    report.metrics["f1_std"] = acc_f1.stdev();
    report.metrics["precision"] = acc_precision.mean();
    report.metrics["precision_std"] = acc_precision.stdev();
    report.metrics["recall"] = acc_recall.mean();
    report.metrics["recall_std"] = acc_recall.stdev();
    Table table;
    table.col_labels = {"value"};
    for (const char* name : {"accuracy", "f1", "precision", "recall"}) {
        table.row_labels.push_back(name);
        table.mean.push_back({report.metrics[name]});
        table.stdev.push_back({report.metrics[std::string(name) + "_std"]});
    }
    report.tables["metrics"] = table;
    return report;
}

/// Training-free real-vs-synthetic detection: fingerprints on synthetic
/// train splits, threshold calibrated on validation min-distances, binary
/// metrics (synthetic positive) on test. Real clips are seed-resampled with
/// replacement to balance classes on both validation and test.
inline EvalReport detection_experiment(const Manifest& manifest,
                                       const FilterMethod& method,
                                       const StftConfig& stft,
                                       std::uint64_t seed, int trials = 5,
                                       unsigned jobs = 0) {
    require(trials >= 1, "detection_experiment: trials must be >= 1");
    const std::vector<std::string> labels = detail::synthetic_labels(manifest);
    require(!labels.empty(),
            "detection_experiment: no synthetic labels in manifest");
    const std::vector<std::string> all = manifest.labels();
    require(std::find(all.begin(), all.end(), "real") != all.end(),
            "detection_experiment: manifest has no 'real' class");

    LazyResiduals residuals(manifest, method, stft, jobs);
    residuals.ensure_all();

    detail::Aggregate acc_accuracy, acc_f1, acc_precision, acc_recall,
        acc_tau, acc_cal_f1;
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t trial_seed = seed + static_cast<std::uint64_t>(t);
        const Manifest split =
            split_manifest(manifest, {0.8, 0.1, 0.1}, trial_seed, true);
        const auto by_label = detail::collect_splits(split);

        std::vector<Fingerprint> fps;
        for (const std::string& label : labels) {
            const detail::LabelIndices& li = by_label.at(label);
            require(!li.train.empty(), "detection_experiment: label '" +
                                           label + "' has no training clips");
            fps.push_back(detail::fingerprint_from_indices(
                label, li.train, residuals, std::nullopt));
        }

        auto min_distance = [&](std::size_t i) {
            return attribute_multi(residuals.at(i), fps,
                                   ScoreKind::mahalanobis)
                .score;
        };
        auto gather = [&](Split which, const char* purpose) {
            std::vector<std::size_t> synthetic;
            std::vector<std::size_t> real;
            for (const auto& [label, li] : by_label) {
                const std::vector<std::size_t>& v =
                    which == Split::val ? li.val : li.test;
                for (std::size_t i : v) {
                    (label == "real" ? real : synthetic).push_back(i);
                }
            }
            require(!synthetic.empty() && !real.empty(),
                    std::string("detection_experiment: empty class in ") +
                        purpose + " split");
            Rng rng(derive_seed(trial_seed, purpose));
            real = detail::balance_to(real, synthetic.size(), rng);
            return std::make_pair(synthetic, real);
        };

        const auto [val_syn, val_real] = gather(Split::val, "oversample-val");
        std::vector<double> distances;
        std::vector<SampleClass> classes;
        for (std::size_t i : val_syn) {
            distances.push_back(min_distance(i));
            classes.push_back(SampleClass::synthetic);
        }
        for (std::size_t i : val_real) {
            distances.push_back(min_distance(i));
            classes.push_back(SampleClass::real);
        }
        const DetectionThreshold threshold =
            sweep_threshold(distances, classes);

        const auto [test_syn, test_real] =
            gather(Split::test, "oversample-test");
        std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
        for (std::size_t i : test_syn) {
            (min_distance(i) < threshold.tau ? tp : fn) += 1;
        }
        for (std::size_t i : test_real) {
            (min_distance(i) < threshold.tau ? fp : tn) += 1;
        }
        const double total = static_cast<double>(tp + fp + tn + fn);
        const double precision =
            tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp)
                        : 0.0;
        const double recall =
            tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn)
                        : 0.0;
        const double f1 = precision + recall > 0.0
                              ? 2.0 * precision * recall / (precision + recall)
                              : 0.0;
        acc_accuracy.add(static_cast<double>(tp + tn) / total);
        acc_precision.add(precision);
        acc_recall.add(recall);
        acc_f1.add(f1);
        acc_tau.add(threshold.tau);
        acc_cal_f1.add(threshold.calibration_f1);
    }

    EvalReport report;
    report.task = "detection";
    report.seed = seed;
    report.trials = trials;
    report.config_echo = {{"filter", method.describe()},
                          {"stft", stft.describe()},
                          {"score", "mahalanobis"},
                          {"positive_class", "synthetic"},
                          {"labels", labels}};
    report.metrics["accuracy"] = acc_accuracy.mean();
    report.metrics["accuracy_std"] = acc_accuracy.stdev();
    report.metrics["f1"] = acc_f1.mean();
    report.metrics["f1_std"] = acc_f1.stdev();
    report.metrics["precision"] = acc_precision.mean();
    report.metrics["precision_std"] = acc_precision.stdev();
    report.metrics["recall"] = acc_recall.mean();
    report.metrics["recall_std"] = acc_recall.stdev();
    report.metrics["tau"] = acc_tau.mean();
    report.metrics["calibration_f1"] = acc_cal_f1.mean();
    Table table;
    table.col_labels = {"value"};
    for (const char* name : {"accuracy", "f1", "precision", "recall"}) {
        table.row_labels.push_back(name);
        table.mean.push_back({report.metrics[name]});
        table.stdev.push_back({report.metrics[std::string(name) + "_std"]});
    }
    report.tables["metrics"] = table;
    return report;
}

/// Noise robustness: the single-model protocol with test clips noise-mixed
/// at each SNR. Fingerprints are built on clean training data only. The
/// noise clip and crop for a given (clip, snr) derive from the base seed, so
/// trials share test signals and only the splits vary.
inline EvalReport noise_robustness_experiment(
    const Manifest& manifest, const Manifest& noise_manifest,
    const std::string& target_label, const std::vector<double>& snr_list_db,
    const FilterMethod& method, const StftConfig& stft, ScoreKind kind,
    std::uint64_t seed, int trials = 5, unsigned jobs = 0) {
    require(!snr_list_db.empty(),
            "noise_robustness_experiment: empty SNR list");
    require(!noise_manifest.entries.empty(),
            "noise_robustness_experiment: empty noise manifest");
    require(!method.external,
            "noise_robustness_experiment: external filter methods are not "
            "supported (companions are pre-filtered from clean audio)");
    const std::vector<std::string> all_labels = manifest.labels();
    require(std::find(all_labels.begin(), all_labels.end(), target_label) !=
                all_labels.end(),
            "noise_robustness_experiment: target label '" + target_label +
                "' not found in manifest");

    // Noise clips are loaded once up front.
    std::vector<AudioSignal> noise_clips(noise_manifest.entries.size());
    parallel_for(noise_clips.size(), jobs, [&](std::size_t i) {
        noise_clips[i] =
            load_wav(noise_manifest.resolve(noise_manifest.entries[i]));
    });

    LazyResiduals clean(manifest, method, stft, jobs);
    const std::vector<std::string> sources =
        detail::ordered_sources(all_labels, target_label);

    std::vector<detail::Aggregate> avg_per_snr(snr_list_db.size());
    std::vector<std::map<std::string, detail::Aggregate>> source_per_snr(
        snr_list_db.size());

    for (std::size_t s = 0; s < snr_list_db.size(); ++s) {
        const double snr_db = snr_list_db[s];
        const std::uint64_t snr_key = static_cast<std::uint64_t>(
            static_cast<std::int64_t>(std::llround(snr_db * 1000.0)));
        auto add_noise = [&](AudioSignal&& signal, std::size_t idx) {
            const std::string& path = manifest.entries[idx].path;
            Rng pick(derive_seed(seed, "noise-pick:" + path, snr_key));
            const AudioSignal& noise =
                noise_clips[static_cast<std::size_t>(
                    pick.below(noise_clips.size()))];
            NoiseSpec spec;
            spec.snr_db = snr_db;
            spec.seed = derive_seed(seed, "noise-mix:" + path, snr_key);
            return mix_noise(signal, noise, spec);
        };
        LazyResiduals noisy(manifest, method, stft, jobs, add_noise);

        for (int t = 0; t < trials; ++t) {
            const std::uint64_t trial_seed =
                seed + static_cast<std::uint64_t>(t);
            const Manifest split =
                split_manifest(manifest, {0.8, 0.0, 0.2}, trial_seed, true);
            const auto by_label = detail::collect_splits(split);

            const detail::LabelIndices& target = by_label.at(target_label);
            require(!target.train.empty() && !target.test.empty(),
                    "noise_robustness_experiment: target '" + target_label +
                        "' too small to split");
            clean.ensure(target.train);
            const Fingerprint fp = detail::fingerprint_from_indices(
                target_label, target.train, clean, std::nullopt);

            double auroc_sum = 0.0;
            for (const std::string& source : sources) {
                const detail::LabelIndices& src = by_label.at(source);
                require(!src.test.empty(),
                        "noise_robustness_experiment: source '" + source +
                            "' has no test clips");
                const std::size_t n =
                    std::min(target.test.size(), src.test.size());
                Rng rng(derive_seed(trial_seed, "balance:" + source));
                const std::vector<std::size_t> pos =
                    rng.sample(target.test, n);
                const std::vector<std::size_t> neg = rng.sample(src.test, n);
                std::vector<std::size_t> needed = pos;
                needed.insert(needed.end(), neg.begin(), neg.end());
                noisy.ensure(needed);

                std::vector<double> scores;
                std::vector<std::uint8_t> labels;
                for (std::size_t i : pos) {
                    scores.push_back(
                        detail::oriented_score(noisy.at(i), fp, kind));
                    labels.push_back(1);
                }
                for (std::size_t i : neg) {
                    scores.push_back(
                        detail::oriented_score(noisy.at(i), fp, kind));
                    labels.push_back(0);
                }
                const double a = auroc(scores, labels);
                source_per_snr[s][source].add(a);
                auroc_sum += a;
            }
            avg_per_snr[s].add(auroc_sum /
                               static_cast<double>(sources.size()));
        }
    }

    EvalReport report;
    report.task = "noise";
    report.seed = seed;
    report.trials = trials;
    report.config_echo = {{"target", target_label},
                          {"filter", method.describe()},
                          {"stft", stft.describe()},
                          {"score", to_string(kind)},
                          {"snr_list_db", snr_list_db}};
    Table table;
    for (const std::string& source : sources) {
        table.col_labels.push_back(source);
    }
    table.col_labels.push_back("Avg.");
    for (std::size_t s = 0; s < snr_list_db.size(); ++s) {
        char row[32];
        std::snprintf(row, sizeof(row), "%g dB", snr_list_db[s]);
        table.row_labels.push_back(row);
        std::vector<double> means, stds;
        for (const std::string& source : sources) {
            means.push_back(source_per_snr[s].at(source).mean());
            stds.push_back(source_per_snr[s].at(source).stdev());
        }
        means.push_back(avg_per_snr[s].mean());
        stds.push_back(avg_per_snr[s].stdev());
        table.mean.push_back(means);
        table.stdev.push_back(stds);
        report.curve.emplace_back(snr_list_db[s], avg_per_snr[s].mean());
    }
    report.tables["auroc_vs_snr"] = table;
    return report;
}

inline std::string EvalReport::render_text() const {
    std::string out;
    out += "task: " + task + "\n";
    out += "seed: " + std::to_string(seed) +
           "  trials: " + std::to_string(trials) + "\n";
    for (const auto& [key, value] : config_echo.items()) {
        out += key + ": " + value.dump() + "\n";
    }
    char buf[64];
    for (const auto& [name, table] : tables) {
        out += "\n[" + name + "]\n";
        std::size_t row_width = 0;
        for (const std::string& r : table.row_labels) {
            row_width = std::max(row_width, r.size());
        }
        std::string header(row_width, ' ');
        for (const std::string& c : table.col_labels) {
            std::snprintf(buf, sizeof(buf), "  %17s", c.c_str());
            header += buf;
        }
        out += header + "\n";
        for (std::size_t r = 0; r < table.row_labels.size(); ++r) {
            std::string line = table.row_labels[r];
            line.resize(row_width, ' ');
            for (std::size_t c = 0; c < table.col_labels.size(); ++c) {
                std::snprintf(buf, sizeof(buf), "  %8.4f (%.4f)",
                              table.mean[r][c], table.stdev[r][c]);
                line += buf;
            }
            out += line + "\n";
        }
    }
    if (!metrics.empty()) {
        out += "\n[metrics]\n";
        for (const auto& [name, value] : metrics) {
            std::snprintf(buf, sizeof(buf), "%.6f", value);
            out += name + " = " + buf + "\n";
        }
    }
    if (!curve.empty()) {
        out += "\n[curve: snr_db, auroc]\n";
        for (const auto& [snr, value] : curve) {
            std::snprintf(buf, sizeof(buf), "%g, %.6f", snr, value);
            out += std::string(buf) + "\n";
        }
    }
    return out;
}

/// Machine-readable report (JSON).
inline void write_report(const EvalReport& report,
                         const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out << report.to_json().dump(2) << "\n";
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

/// Two-column CSV of (SNR dB, AUROC) for plotting.
inline void write_curve_csv(const EvalReport& report,
                            const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out << "snr_db,auroc\n";
    char buf[64];
    for (const auto& [snr, value] : report.curve) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g", snr, value);
        out << buf << "\n";
    }
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

} // namespace afp
