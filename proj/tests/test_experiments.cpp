// Experiment runners on a small generated corpus: separability, chance-level
// sanity checks, determinism, and the external-companion path.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "afp/experiments.hpp"
#include "afp/fixtures.hpp"

using namespace afp;
namespace fs = std::filesystem;

namespace {

/// Shared desk corpus: 3 systems x 24 clips + 24 real at 16 kHz, 0.3 s.
const Manifest& corpus() {
    static const Manifest m = [] {
        const fs::path dir = fs::temp_directory_path() / "afp_exp_corpus";
        fs::remove_all(dir);
        return generate_surrogate_corpus(default_surrogate_specs(16000, 0.3),
                                         24, 24, 3, dir);
    }();
    return m;
}

const FilterMethod kLowPass = parse_filter_method("lowpass:1000:1500");
const StftConfig kStft{128, 2, WindowKind::hann};

} // namespace

TEST_CASE("single_model_experiment separates the surrogate systems") {
    const EvalReport report = single_model_experiment(
        corpus(), "SYS_A", kLowPass, kStft, ScoreKind::mahalanobis, 7, 2);
    const Table& table = report.tables.at("auroc");
    REQUIRE(table.row_labels ==
            std::vector<std::string>{"SYS_B", "SYS_C", "real", "Avg."});
    for (const auto& row : table.mean) {
        REQUIRE(row[0] >= 0.99);
    }
    REQUIRE(report.metrics.at("average_auroc") >= 0.99);
}

TEST_CASE("single_model_experiment with correlation scoring") {
    const EvalReport report = single_model_experiment(
        corpus(), "SYS_B", kLowPass, kStft, ScoreKind::correlation, 7, 2);
    REQUIRE(report.metrics.at("average_auroc") >= 0.95);
}

TEST_CASE("byte-identical source clips score at chance level") {
    // Source 'twin' lists the exact files of the target's held-out test
    // split, so the two test populations are indistinguishable and every
    // positive-negative pair ties: AUROC must be exactly 0.5.
    Manifest twin;
    twin.base_dir = corpus().base_dir;
    int i = 0;
    for (const ManifestEntry& e : corpus().entries) {
        if (e.label != "SYS_A") {
            continue;
        }
        const bool held_out = i++ % 4 == 0;
        twin.entries.push_back(
            {e.path, "SYS_A", held_out ? Split::test : Split::train});
        if (held_out) {
            twin.entries.push_back({e.path, "twin", Split::test});
        }
    }
    const EvalReport report = single_model_experiment(
        twin, "SYS_A", kLowPass, kStft, ScoreKind::mahalanobis, 11, 3);
    const Table& table = report.tables.at("auroc");
    REQUIRE(table.row_labels.front() == "twin");
    REQUIRE(table.mean.front()[0] == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("experiment reports are bit-reproducible") {
    const EvalReport a = single_model_experiment(
        corpus(), "SYS_C", kLowPass, kStft, ScoreKind::mahalanobis, 13, 2, 2);
    const EvalReport b = single_model_experiment(
        corpus(), "SYS_C", kLowPass, kStft, ScoreKind::mahalanobis, 13, 2, 1);
    REQUIRE(a.to_json().dump() == b.to_json().dump());
    const EvalReport c = single_model_experiment(
        corpus(), "SYS_C", kLowPass, kStft, ScoreKind::mahalanobis, 14, 2, 2);
    REQUIRE(a.to_json().dump() != c.to_json().dump());
}

TEST_CASE("single_model_experiment error paths") {
    REQUIRE_THROWS_WITH(
        single_model_experiment(corpus(), "NO_SUCH", kLowPass, kStft,
                                ScoreKind::mahalanobis, 1, 1),
        Catch::Matchers::ContainsSubstring("not found"));
}

TEST_CASE("external companion path reproduces the designed-filter run") {
    // Write a FIR-filtered companion next to every clip, then run the same
    // experiment through residual_from_pair. Residuals agree within 1e-12,
    // so the AUROC table must match.
    const Manifest& m = corpus();
    const FirFilter filter = design_fir(kLowPass.spec, 16000);
    for (const ManifestEntry& e : m.entries) {
        const fs::path src = m.resolve(e);
        const fs::path dst = companion_path(src, "fir");
        if (!fs::exists(dst)) {
            write_wav(apply_fir(load_wav(src), filter), dst);
        }
    }
    const EvalReport internal = single_model_experiment(
        m, "SYS_A", kLowPass, kStft, ScoreKind::mahalanobis, 5, 2);
    const EvalReport external = single_model_experiment(
        m, "SYS_A", parse_filter_method("external:fir"), kStft,
        ScoreKind::mahalanobis, 5, 2);
    const Table& ti = internal.tables.at("auroc");
    const Table& te = external.tables.at("auroc");
    REQUIRE(ti.row_labels == te.row_labels);
    for (std::size_t r = 0; r < ti.mean.size(); ++r) {
        REQUIRE(ti.mean[r][0] == Catch::Approx(te.mean[r][0]).margin(1e-6));
    }
}

TEST_CASE("external method with missing companions fails loudly") {
    REQUIRE_THROWS_WITH(
        single_model_experiment(corpus(), "SYS_A",
                                parse_filter_method("external:nothere"),
                                kStft, ScoreKind::mahalanobis, 1, 1),
        Catch::Matchers::ContainsSubstring("companion"));
}

TEST_CASE("closed_world_experiment on the surrogate corpus") {
    const EvalReport report =
        closed_world_experiment(corpus(), kLowPass, kStft, 7, 2);
    REQUIRE(report.metrics.at("accuracy") >= 0.99);
    REQUIRE(report.metrics.at("f1") >= 0.99);
    REQUIRE(report.metrics.at("precision") >= 0.99);
    REQUIRE(report.metrics.at("recall") >= 0.99);
}

TEST_CASE("closed_world_experiment at chance for cloned generators") {
    // Two labels drawing from the same generator: accuracy ~ 0.5.
    Manifest cloned;
    cloned.base_dir = corpus().base_dir;
    int i = 0;
    for (const ManifestEntry& e : corpus().entries) {
        if (e.label == "SYS_A") {
            cloned.entries.push_back(
                {e.path, (i++ % 2 == 0) ? "left" : "right", Split::none});
        }
    }
    const EvalReport report =
        closed_world_experiment(cloned, kLowPass, kStft, 3, 5);
    REQUIRE(report.metrics.at("accuracy") >= 0.25);
    REQUIRE(report.metrics.at("accuracy") <= 0.75);
}

TEST_CASE("closed_world_experiment requires two synthetic labels") {
    Manifest only_one;
    only_one.base_dir = corpus().base_dir;
    for (const ManifestEntry& e : corpus().entries) {
        if (e.label == "SYS_A" || e.label == "real") {
            only_one.entries.push_back(e);
        }
    }
    REQUIRE_THROWS_AS(
        closed_world_experiment(only_one, kLowPass, kStft, 1, 1), Error);
}

TEST_CASE("detection_experiment on the surrogate corpus") {
    const EvalReport report =
        detection_experiment(corpus(), kLowPass, kStft, 7, 2);
    REQUIRE(report.metrics.at("f1") >= 0.95);
    REQUIRE(report.metrics.at("accuracy") >= 0.95);
    REQUIRE(report.metrics.at("tau") > 0.0);
}

TEST_CASE("detection_experiment requires a real class") {
    Manifest no_real;
    no_real.base_dir = corpus().base_dir;
    for (const ManifestEntry& e : corpus().entries) {
        if (e.label != "real") {
            no_real.entries.push_back(e);
        }
    }
    REQUIRE_THROWS_WITH(
        detection_experiment(no_real, kLowPass, kStft, 1, 1),
        Catch::Matchers::ContainsSubstring("real"));
}

TEST_CASE("noise_robustness_experiment") {
    const fs::path noise_dir = fs::temp_directory_path() / "afp_exp_noise";
    fs::remove_all(noise_dir);
    const Manifest noise = generate_noise_corpus(3, 0.6, 16000, 21, noise_dir);

    SECTION("SNR 200 dB matches the clean run within 0.01") {
        const EvalReport clean = single_model_experiment(
            corpus(), "SYS_A", kLowPass, kStft, ScoreKind::mahalanobis, 7, 1);
        const EvalReport noisy = noise_robustness_experiment(
            corpus(), noise, "SYS_A", {200.0}, kLowPass, kStft,
            ScoreKind::mahalanobis, 7, 1);
        REQUIRE(noisy.curve.size() == 1);
        REQUIRE(std::fabs(noisy.curve[0].second -
                          clean.metrics.at("average_auroc")) <= 0.01);
    }
    SECTION("high-SNR endpoint at least as good as the 0 dB endpoint") {
        const EvalReport report = noise_robustness_experiment(
            corpus(), noise, "SYS_A", {0.0, 40.0}, kLowPass, kStft,
            ScoreKind::mahalanobis, 7, 1);
        REQUIRE(report.curve.size() == 2);
        REQUIRE(report.curve[1].second >= report.curve[0].second);
    }
    SECTION("external methods rejected") {
        REQUIRE_THROWS_AS(
            noise_robustness_experiment(corpus(), noise, "SYS_A", {20.0},
                                        parse_filter_method("external:fir"),
                                        kStft, ScoreKind::mahalanobis, 7, 1),
            Error);
    }
}
