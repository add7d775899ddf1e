// Command-line front end: fingerprinting, scoring, attribution, detection,
// evaluation protocols, filter inspection and fixture generation.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error. Diagnostics go to
// stderr; results go to files or stdout.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "afp/afp.hpp"

namespace {

namespace fs = std::filesystem;

struct CommonOpts {
    std::string filter = "lowpass:1000:1500"; // cutoff 1 kHz, stopband 1.5 kHz
    std::string stft = "128:2";
    std::string window = "hann";
    std::string metric = "mahalanobis";
    std::uint64_t seed = 0;
    int trials = 5;
    unsigned jobs = 0;
};

afp::StftConfig stft_from(const CommonOpts& o) {
    return afp::parse_stft_flag(o.stft,
                                afp::window_kind_from_string(o.window));
}

void add_filter_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--filter", o.filter,
                    "Residual filter: lowpass:<edge>:<stop_edge>, "
                    "highpass:<edge>:<stop_edge>, "
                    "bandpass:<lo>:<hi>[:<transition>], "
                    "bandstop:<lo>:<hi>[:<transition>] (Hz), or "
                    "external:<tag> for pre-filtered companion files "
                    "<stem>.<tag><ext>. Default: the reference "
                    "low-pass (1 kHz cutoff, 1.5 kHz stopband edge).")
        ->capture_default_str();
    cmd->add_option("--stft", o.stft,
                    "STFT as window_len:hop. Default 128:2, the reference pairing "
                    "for spectral filters; use 2048:128 with "
                    "external-codec residuals.")
        ->capture_default_str();
    cmd->add_option("--window", o.window, "Analysis window: hann or hamming")
        ->capture_default_str();
}

void add_metric_flag(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--metric", o.metric,
                    "Score: mahalanobis or correlation. Mahalanobis is the "
                    "reference pairing for the low-pass configuration; "
                    "correlation for the external-codec configuration.")
        ->capture_default_str();
}

void add_jobs_flag(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--jobs", o.jobs,
                    "Worker threads for corpus-level work (0 = AFP_JOBS env "
                    "var or hardware concurrency); results do not depend on "
                    "this value")
        ->capture_default_str();
}

std::vector<afp::Fingerprint>
load_fingerprint_set(const std::vector<std::string>& paths) {
    std::vector<fs::path> files;
    for (const std::string& p : paths) {
        const fs::path path(p);
        if (fs::is_directory(path)) {
            std::vector<fs::path> in_dir;
            for (const auto& entry : fs::directory_iterator(path)) {
                if (!entry.is_regular_file()) {
                    continue;
                }
                const std::string ext = entry.path().extension().string();
                if (ext == ".fp" || ext == ".json") {
                    in_dir.push_back(entry.path());
                }
            }
            std::sort(in_dir.begin(), in_dir.end());
            files.insert(files.end(), in_dir.begin(), in_dir.end());
        } else {
            files.push_back(path);
        }
    }
    if (files.empty()) {
        throw afp::Error("no fingerprint files found");
    }
    std::vector<afp::Fingerprint> fps;
    fps.reserve(files.size());
    for (const fs::path& f : files) {
        fps.push_back(afp::load_fingerprint(f));
    }
    return fps;
}

/// Residual of one input clip using the configuration stored in a
/// fingerprint (persisted coefficients for designed filters, companion file
/// for external methods).
afp::ResidualVector residual_for_input(const afp::Fingerprint& fp,
                                       const fs::path& input) {
    afp::AudioSignal signal = afp::load_wav(input);
    if (signal.sample_rate != fp.sample_rate) {
        throw afp::Error("sample-rate mismatch: " + input.string() + " is " +
                         std::to_string(signal.sample_rate) +
                         " Hz, fingerprint expects " +
                         std::to_string(fp.sample_rate) + " Hz");
    }
    if (fp.filter.external) {
        const fs::path comp = afp::companion_path(input, fp.filter.tag);
        if (!fs::exists(comp)) {
            throw afp::IoError("missing external companion '" + comp.string() +
                               "' for " + input.string());
        }
        return afp::residual_from_pair(signal, afp::load_wav(comp), fp.stft,
                                       fp.filter.tag);
    }
    afp::FirFilter filter;
    filter.coefficients = fp.filter.coefficients;
    filter.sample_rate = fp.sample_rate;
    filter.spec = fp.filter.spec;
    filter.id = fp.filter.spec.describe();
    return afp::residual(signal, filter, fp.stft);
}

afp::FilterMethod method_of(const afp::Fingerprint& fp) {
    afp::FilterMethod m;
    m.external = fp.filter.external;
    m.tag = fp.filter.tag;
    m.spec = fp.filter.spec;
    return m;
}

std::vector<double> parse_snr_list(const std::string& flag) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= flag.size()) {
        const std::size_t comma = flag.find(',', start);
        const std::string part =
            flag.substr(start, comma == std::string::npos ? std::string::npos
                                                          : comma - start);
        if (!part.empty()) {
            try {
                out.push_back(std::stod(part));
            } catch (const std::logic_error&) {
                throw afp::Error("invalid SNR list entry: '" + part + "'");
            }
        }
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    if (out.empty()) {
        throw afp::Error("empty SNR list");
    }
    return out;
}

void emit_report(const afp::EvalReport& report, const std::string& out,
                 const std::string& curve_out) {
    std::cout << report.render_text();
    if (!out.empty()) {
        afp::write_report(report, out);
        std::cerr << "report written to " << out << "\n";
    }
    if (!report.curve.empty()) {
        std::string curve_path = curve_out;
        if (curve_path.empty() && !out.empty()) {
            curve_path = out + ".curve.csv";
        }
        if (!curve_path.empty()) {
            afp::write_curve_csv(report, curve_path);
            std::cerr << "curve written to " << curve_path << "\n";
        }
    }
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Training-free spectral fingerprints for synthetic speech "
                 "attribution and detection"};
    app.require_subcommand(1);

    // fingerprint
    struct {
        CommonOpts common;
        std::string manifest;
        std::string label;
        std::string out;
        double shrinkage = -1.0; // <0 = auto (1e-3 * trace/F)
    } fp_opts;
    auto* fp_cmd = app.add_subcommand(
        "fingerprint", "Estimate a system fingerprint from manifest clips");
    fp_cmd->add_option("--manifest", fp_opts.manifest, "Manifest CSV")
        ->required();
    fp_cmd->add_option("--label", fp_opts.label, "System label to fingerprint")
        ->required();
    fp_cmd->add_option("--out", fp_opts.out, "Output fingerprint file")
        ->required();
    fp_cmd->add_option("--shrinkage", fp_opts.shrinkage,
                       "Covariance shrinkage (default: 1e-3 * trace/F)");
    add_filter_flags(fp_cmd, fp_opts.common);
    add_jobs_flag(fp_cmd, fp_opts.common);
    fp_cmd->callback([&] {
        const afp::Manifest manifest = afp::load_manifest(fp_opts.manifest);
        std::vector<std::size_t> indices;
        bool any_split = false;
        for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
            if (manifest.entries[i].label == fp_opts.label &&
                manifest.entries[i].split != afp::Split::none) {
                any_split = true;
            }
        }
        for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
            const afp::ManifestEntry& e = manifest.entries[i];
            if (e.label != fp_opts.label) {
                continue;
            }
            if (!any_split || e.split == afp::Split::train) {
                indices.push_back(i);
            }
        }
        if (indices.empty()) {
            throw afp::Error("no clips for label '" + fp_opts.label +
                             "' in " + fp_opts.manifest);
        }
        afp::LazyResiduals residuals(
            manifest, afp::parse_filter_method(fp_opts.common.filter),
            stft_from(fp_opts.common), fp_opts.common.jobs);
        residuals.ensure(indices);
        std::vector<afp::ResidualVector> rs;
        rs.reserve(indices.size());
        for (std::size_t i : indices) {
            rs.push_back(residuals.at(i));
        }
        const afp::Fingerprint fp = afp::estimate_fingerprint(
            fp_opts.label, rs,
            fp_opts.shrinkage >= 0.0
                ? std::optional<double>(fp_opts.shrinkage)
                : std::nullopt,
            residuals.filter_info());
        afp::save_fingerprint(fp, fp_opts.out);
        std::cerr << "fingerprint for '" << fp_opts.label << "' from "
                  << indices.size() << " clips written to " << fp_opts.out
                  << "\n";
    });

    // score
    struct {
        CommonOpts common;
        std::string fingerprint;
        std::string input;
    } score_opts;
    auto* score_cmd = app.add_subcommand(
        "score", "Score one clip against one fingerprint");
    score_cmd
        ->add_option("--fingerprint", score_opts.fingerprint,
                     "Fingerprint file")
        ->required();
    score_cmd->add_option("--input", score_opts.input, "Input WAV")
        ->required();
    add_metric_flag(score_cmd, score_opts.common);
    score_cmd->callback([&] {
        const afp::Fingerprint fp =
            afp::load_fingerprint(score_opts.fingerprint);
        const afp::ResidualVector r = residual_for_input(fp, score_opts.input);
        const afp::ScoreKind kind =
            afp::score_kind_from_string(score_opts.common.metric);
        const double s = kind == afp::ScoreKind::correlation
                             ? afp::correlation_score(r, fp)
                             : afp::mahalanobis_score(r, fp);
        std::printf("%.17g\n", s);
    });

    // attribute
    struct {
        CommonOpts common;
        std::vector<std::string> fingerprints;
        std::string input;
        bool show_scores = false;
    } attr_opts;
    auto* attr_cmd = app.add_subcommand(
        "attribute", "Attribute one clip to the best-matching fingerprint");
    attr_cmd
        ->add_option("--fingerprints", attr_opts.fingerprints,
                     "Fingerprint files or directories")
        ->required();
    attr_cmd->add_option("--input", attr_opts.input, "Input WAV")->required();
    attr_cmd->add_flag("--scores", attr_opts.show_scores,
                       "Also print the per-candidate scores");
    add_metric_flag(attr_cmd, attr_opts.common);
    attr_cmd->callback([&] {
        const std::vector<afp::Fingerprint> fps =
            load_fingerprint_set(attr_opts.fingerprints);
        const afp::ResidualVector r =
            residual_for_input(fps.front(), attr_opts.input);
        const afp::AttributionResult result = afp::attribute_multi(
            r, fps, afp::score_kind_from_string(attr_opts.common.metric));
        std::printf("%s\n", result.predicted_label.c_str());
        if (attr_opts.show_scores) {
            for (const auto& [label, score] : result.per_candidate) {
                std::printf("%s %.17g\n", label.c_str(), score);
            }
        }
    });

    // detect
    struct {
        std::vector<std::string> fingerprints;
        std::string input;
        std::string tau_file;
        double tau = std::numeric_limits<double>::quiet_NaN();
    } detect_opts;
    auto* detect_cmd = app.add_subcommand(
        "detect", "Classify one clip as synthetic or real by minimum "
                  "Mahalanobis distance against a threshold");
    detect_cmd
        ->add_option("--fingerprints", detect_opts.fingerprints,
                     "Fingerprint files or directories")
        ->required();
    detect_cmd->add_option("--input", detect_opts.input, "Input WAV")
        ->required();
    auto* tau_file_opt = detect_cmd->add_option(
        "--tau-file", detect_opts.tau_file,
        "Threshold file as written by sweep-threshold (JSON with a 'tau' "
        "field, or a bare number)");
    detect_cmd->add_option("--tau", detect_opts.tau, "Threshold value")
        ->excludes(tau_file_opt);
    detect_cmd->callback([&] {
        afp::DetectionThreshold threshold;
        if (!detect_opts.tau_file.empty()) {
            std::ifstream in(detect_opts.tau_file);
            if (!in) {
                throw afp::IoError("cannot open threshold file: " +
                                   detect_opts.tau_file);
            }
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw afp::IoError("corrupted threshold file " +
                                   detect_opts.tau_file + ": " + e.what());
            }
            if (j.is_number()) {
                threshold.tau = j.get<double>();
            } else {
                threshold.tau = j.at("tau").get<double>();
                threshold.calibration_f1 = j.value("calibration_f1", 0.0);
            }
        } else if (!std::isnan(detect_opts.tau)) {
            threshold.tau = detect_opts.tau;
        } else {
            throw afp::Error("detect: either --tau-file or --tau is required");
        }
        const std::vector<afp::Fingerprint> fps =
            load_fingerprint_set(detect_opts.fingerprints);
        const afp::ResidualVector r =
            residual_for_input(fps.front(), detect_opts.input);
        const afp::DetectionResult result = afp::detect(r, fps, threshold);
        std::printf("%s\n", result.decision == afp::SampleClass::synthetic
                                ? "synthetic"
                                : "real");
        std::fprintf(stderr, "min_distance=%.17g nearest=%s tau=%.17g\n",
                     result.min_distance, result.nearest_label.c_str(),
                     threshold.tau);
    });

    // sweep-threshold
    struct {
        CommonOpts common;
        std::vector<std::string> fingerprints;
        std::string manifest;
        std::string out;
    } sweep_opts;
    auto* sweep_cmd = app.add_subcommand(
        "sweep-threshold",
        "Calibrate the detection threshold on validation clips (maximizes "
        "F1 of 'min distance < tau => synthetic')");
    sweep_cmd
        ->add_option("--fingerprints", sweep_opts.fingerprints,
                     "Fingerprint files or directories")
        ->required();
    sweep_cmd
        ->add_option("--manifest", sweep_opts.manifest,
                     "Validation manifest; entries labeled 'real' are the "
                     "real class, everything else synthetic. Entries marked "
                     "split=val are used when present, otherwise all.")
        ->required();
    sweep_cmd->add_option("--out", sweep_opts.out, "Output threshold file")
        ->required();
    add_jobs_flag(sweep_cmd, sweep_opts.common);
    sweep_cmd->callback([&] {
        const std::vector<afp::Fingerprint> fps =
            load_fingerprint_set(sweep_opts.fingerprints);
        const afp::Manifest manifest = afp::load_manifest(sweep_opts.manifest);
        bool any_val = false;
        for (const afp::ManifestEntry& e : manifest.entries) {
            if (e.split == afp::Split::val) {
                any_val = true;
            }
        }
        std::vector<std::size_t> indices;
        for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
            if (!any_val ||
                manifest.entries[i].split == afp::Split::val) {
                indices.push_back(i);
            }
        }
        afp::LazyResiduals residuals(manifest, method_of(fps.front()),
                                     fps.front().stft,
                                     sweep_opts.common.jobs);
        residuals.ensure(indices);
        std::vector<double> distances;
        std::vector<afp::SampleClass> classes;
        for (std::size_t i : indices) {
            distances.push_back(
                afp::attribute_multi(residuals.at(i), fps,
                                     afp::ScoreKind::mahalanobis)
                    .score);
            classes.push_back(manifest.entries[i].label == "real"
                                  ? afp::SampleClass::real
                                  : afp::SampleClass::synthetic);
        }
        const afp::DetectionThreshold threshold =
            afp::sweep_threshold(distances, classes);
        nlohmann::json j;
        j["tau"] = threshold.tau;
        j["calibration_f1"] = threshold.calibration_f1;
        std::ofstream out(sweep_opts.out, std::ios::trunc);
        if (!out) {
            throw afp::IoError("cannot open for writing: " + sweep_opts.out);
        }
        out << j.dump(2) << "\n";
        std::fprintf(stderr, "tau=%.17g calibration_f1=%.6f (%zu clips)\n",
                     threshold.tau, threshold.calibration_f1, indices.size());
    });

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Run an experiment");
    eval_cmd->require_subcommand(1);
    struct {
        CommonOpts common;
        std::string manifest;
        std::string target;
        std::string noise_manifest;
        std::string snrs = "0,10,20,30,40";
        std::string out;
        std::string curve_out;
    } eval_opts;

    auto add_eval_common = [&](CLI::App* cmd, bool with_metric) {
        cmd->add_option("--manifest", eval_opts.manifest, "Manifest CSV")
            ->required();
        cmd->add_option("--seed", eval_opts.common.seed, "Base seed")
            ->capture_default_str();
        cmd->add_option("--trials", eval_opts.common.trials,
                        "Trials run with seeds seed..seed+trials-1; reports "
                        "mean and standard deviation")
            ->capture_default_str();
        cmd->add_option("--out", eval_opts.out,
                        "Write the machine-readable JSON report here");
        add_filter_flags(cmd, eval_opts.common);
        if (with_metric) {
            add_metric_flag(cmd, eval_opts.common);
        }
        add_jobs_flag(cmd, eval_opts.common);
    };

    auto* eval_single = eval_cmd->add_subcommand(
        "single", "Open-world single-model attribution (pairwise AUROC "
                  "against every other source)");
    add_eval_common(eval_single, true);
    eval_single->add_option("--target", eval_opts.target, "Target system")
        ->required();
    eval_single->callback([&] {
        Stopwatch timer;
        const afp::EvalReport report = afp::single_model_experiment(
            afp::load_manifest(eval_opts.manifest), eval_opts.target,
            afp::parse_filter_method(eval_opts.common.filter),
            stft_from(eval_opts.common),
            afp::score_kind_from_string(eval_opts.common.metric),
            eval_opts.common.seed, eval_opts.common.trials,
            eval_opts.common.jobs);
        emit_report(report, eval_opts.out, "");
        std::fprintf(stderr, "completed in %.2f s\n", timer.seconds());
    });

    auto* eval_closed = eval_cmd->add_subcommand(
        "closed", "Closed-world multi-model attribution (argmin Mahalanobis, "
                  "macro metrics)");
    add_eval_common(eval_closed, false);
    eval_closed->callback([&] {
        Stopwatch timer;
        const afp::EvalReport report = afp::closed_world_experiment(
            afp::load_manifest(eval_opts.manifest),
            afp::parse_filter_method(eval_opts.common.filter),
            stft_from(eval_opts.common), eval_opts.common.seed,
            eval_opts.common.trials, eval_opts.common.jobs);
        emit_report(report, eval_opts.out, "");
        std::fprintf(stderr, "completed in %.2f s\n", timer.seconds());
    });

    auto* eval_detection = eval_cmd->add_subcommand(
        "detection", "Training-free real-vs-synthetic detection with "
                     "validation-calibrated threshold");
    add_eval_common(eval_detection, false);
    eval_detection->callback([&] {
        Stopwatch timer;
        const afp::EvalReport report = afp::detection_experiment(
            afp::load_manifest(eval_opts.manifest),
            afp::parse_filter_method(eval_opts.common.filter),
            stft_from(eval_opts.common), eval_opts.common.seed,
            eval_opts.common.trials, eval_opts.common.jobs);
        emit_report(report, eval_opts.out, "");
        std::fprintf(stderr, "completed in %.2f s\n", timer.seconds());
    });

    auto* eval_noise = eval_cmd->add_subcommand(
        "noise", "Single-model attribution with noise-mixed test clips "
                 "across an SNR sweep (fingerprints stay clean-trained)");
    add_eval_common(eval_noise, true);
    eval_noise->add_option("--target", eval_opts.target, "Target system")
        ->required();
    eval_noise
        ->add_option("--noise-manifest", eval_opts.noise_manifest,
                     "Manifest of noise clips")
        ->required();
    eval_noise->add_option("--snrs", eval_opts.snrs,
                           "Comma-separated SNR list in dB")
        ->capture_default_str();
    eval_noise->add_option("--curve-out", eval_opts.curve_out,
                           "Write (snr_db, auroc) CSV here (default: "
                           "<out>.curve.csv when --out is given)");
    eval_noise->callback([&] {
        Stopwatch timer;
        const afp::EvalReport report = afp::noise_robustness_experiment(
            afp::load_manifest(eval_opts.manifest),
            afp::load_manifest(eval_opts.noise_manifest), eval_opts.target,
            parse_snr_list(eval_opts.snrs),
            afp::parse_filter_method(eval_opts.common.filter),
            stft_from(eval_opts.common),
            afp::score_kind_from_string(eval_opts.common.metric),
            eval_opts.common.seed, eval_opts.common.trials,
            eval_opts.common.jobs);
        emit_report(report, eval_opts.out, eval_opts.curve_out);
        std::fprintf(stderr, "completed in %.2f s\n", timer.seconds());
    });

    // filter-response
    struct {
        std::string filter = "lowpass:1000:1500";
        int rate = 22050;
        int points = 512;
        std::string out;
    } resp_opts;
    auto* resp_cmd = app.add_subcommand(
        "filter-response", "Design a filter and print its frequency response "
                           "as CSV (frequency_hz, gain_db)");
    resp_cmd->add_option("--filter", resp_opts.filter, "Filter flag")
        ->capture_default_str();
    resp_cmd->add_option("--rate", resp_opts.rate, "Sample rate in Hz")
        ->capture_default_str();
    resp_cmd->add_option("--points", resp_opts.points, "Number of samples")
        ->capture_default_str();
    resp_cmd->add_option("--out", resp_opts.out, "Output CSV (default stdout)");
    resp_cmd->callback([&] {
        const afp::FilterMethod method =
            afp::parse_filter_method(resp_opts.filter);
        if (method.external) {
            throw afp::Error(
                "filter-response: external methods have no designed response");
        }
        const afp::FirFilter filter =
            afp::design_fir(method.spec, resp_opts.rate);
        const auto response =
            afp::frequency_response(filter, resp_opts.points);
        std::ostream* os = &std::cout;
        std::ofstream file;
        if (!resp_opts.out.empty()) {
            file.open(resp_opts.out, std::ios::trunc);
            if (!file) {
                throw afp::IoError("cannot open for writing: " +
                                   resp_opts.out);
            }
            os = &file;
        }
        *os << "frequency_hz,gain_db\n";
        char buf[64];
        for (const auto& [freq, gain] : response) {
            std::snprintf(buf, sizeof(buf), "%.6f,%.6f", freq, gain);
            *os << buf << "\n";
        }
        std::fprintf(stderr, "%zu taps\n", filter.coefficients.size());
    });

    // gen-fixtures
    struct {
        std::string out;
        int clips_per_system = 200;
        int n_real = 200;
        int noise_clips = 12;
        double noise_seconds = 1.5;
        double clip_seconds = 0.5;
        int rate = 16000;
        std::uint64_t seed = 0;
    } gen_opts;
    auto* gen_cmd = app.add_subcommand(
        "gen-fixtures", "Generate the deterministic surrogate corpus (three "
                        "synthetic systems plus 'real') and noise clips");
    gen_cmd->add_option("--out", gen_opts.out, "Output directory")->required();
    gen_cmd->add_option("--clips-per-system", gen_opts.clips_per_system,
                        "Clips per synthetic system")
        ->capture_default_str();
    gen_cmd->add_option("--real", gen_opts.n_real, "Number of real clips")
        ->capture_default_str();
    gen_cmd->add_option("--noise-clips", gen_opts.noise_clips,
                        "Noise clips for robustness runs (0 = none)")
        ->capture_default_str();
    gen_cmd->add_option("--noise-seconds", gen_opts.noise_seconds,
                        "Noise clip duration")
        ->capture_default_str();
    gen_cmd->add_option("--clip-seconds", gen_opts.clip_seconds,
                        "Speech clip duration")
        ->capture_default_str();
    gen_cmd->add_option("--rate", gen_opts.rate, "Sample rate in Hz")
        ->capture_default_str();
    gen_cmd->add_option("--seed", gen_opts.seed, "Corpus seed")
        ->capture_default_str();
    gen_cmd->callback([&] {
        Stopwatch timer;
        const auto specs = afp::default_surrogate_specs(gen_opts.rate,
                                                        gen_opts.clip_seconds);
        afp::generate_surrogate_corpus(specs, gen_opts.clips_per_system,
                                       gen_opts.n_real, gen_opts.seed,
                                       gen_opts.out);
        std::cout << (fs::path(gen_opts.out) / "manifest.csv").string()
                  << "\n";
        if (gen_opts.noise_clips > 0) {
            afp::generate_noise_corpus(gen_opts.noise_clips,
                                       gen_opts.noise_seconds, gen_opts.rate,
                                       gen_opts.seed, gen_opts.out);
            std::cout
                << (fs::path(gen_opts.out) / "noise_manifest.csv").string()
                << "\n";
        }
        std::fprintf(stderr, "fixtures generated in %.2f s\n",
                     timer.seconds());
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const afp::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const afp::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
