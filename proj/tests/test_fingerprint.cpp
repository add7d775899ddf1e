// Residual semantics, fingerprint estimation against a two-pass oracle,
// lossless persistence.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "afp/fingerprint.hpp"
#include "afp/linalg.hpp"
#include "afp/rng.hpp"
#include "oracles.hpp"

using namespace afp;
namespace fs = std::filesystem;

namespace {

const StftConfig kConfig{128, 16, WindowKind::hann};

AudioSignal random_signal(std::uint64_t seed, std::size_t n, int rate) {
    Rng rng(seed);
    AudioSignal s;
    s.sample_rate = rate;
    s.samples.resize(n);
    for (double& x : s.samples) {
        x = rng.uniform(-1.0, 1.0);
    }
    return s;
}

ResidualVector synthetic_residual(std::uint64_t seed, std::size_t dim) {
    Rng rng(seed);
    ResidualVector r;
    r.config = kConfig;
    r.config.window_len = static_cast<int>(2 * (dim - 1));
    r.config.hop = 2;
    r.sample_rate = 16000;
    r.filter_id = "test";
    r.values.resize(dim);
    for (double& v : r.values) {
        v = rng.normal();
    }
    return r;
}

Fingerprint random_fingerprint(std::uint64_t seed, std::size_t dim,
                               std::size_t n_train) {
    std::vector<ResidualVector> rs;
    for (std::size_t i = 0; i < n_train; ++i) {
        rs.push_back(synthetic_residual(derive_seed(seed, "r", i), dim));
    }
    return estimate_fingerprint("fp" + std::to_string(seed), rs);
}

} // namespace

TEST_CASE("residual definitions") {
    const AudioSignal signal = random_signal(5, 4000, 22050);
    SECTION("identity filter gives the zero vector exactly") {
        FirFilter identity;
        identity.coefficients = {1.0};
        identity.sample_rate = 22050;
        const ResidualVector r = residual(signal, identity, kConfig);
        for (double v : r.values) {
            REQUIRE(v == 0.0);
        }
    }
    SECTION("all-zero signal gives the zero vector") {
        AudioSignal zero;
        zero.sample_rate = 22050;
        zero.samples.assign(2000, 0.0);
        const FirFilter f = design_fir(
            {FilterKind::low_pass, 1000.0, 0.0, 500.0, 60.0}, 22050);
        const ResidualVector r = residual(zero, f, kConfig);
        for (double v : r.values) {
            REQUIRE(v == Catch::Approx(0.0).margin(1e-9));
        }
    }
    SECTION("equals the difference of independently computed energies") {
        const FirFilter f = design_fir(
            {FilterKind::low_pass, 1000.0, 0.0, 500.0, 60.0}, 22050);
        const ResidualVector r = residual(signal, f, kConfig);
        const EnergyVector e1 = average_energy(signal, kConfig);
        const EnergyVector e2 =
            average_energy(apply_fir(signal, f), kConfig);
        for (std::size_t i = 0; i < r.values.size(); ++i) {
            REQUIRE(std::fabs(r.values[i] -
                              (e1.values[i] - e2.values[i])) <= 1e-12);
        }
    }
}

TEST_CASE("residual is duration-invariant under aligned self-concatenation") {
    // Non-overlapping frames (hop = L) and a zero tail longer than the
    // filter memory, so doubling the signal exactly duplicates the frame
    // set on both the original and filtered sides.
    StftConfig config{128, 128, WindowKind::hann};
    const FirFilter f =
        design_fir({FilterKind::low_pass, 1500.0, 0.0, 600.0, 60.0}, 16000);
    AudioSignal x = random_signal(44, 1280, 16000);
    REQUIRE(f.coefficients.size() < 128);
    for (std::size_t i = 1280 - 128; i < 1280; ++i) {
        x.samples[i] = 0.0;
    }
    AudioSignal doubled = x;
    doubled.samples.insert(doubled.samples.end(), x.samples.begin(),
                           x.samples.end());
    const ResidualVector once = residual(x, f, config);
    const ResidualVector twice = residual(doubled, f, config);
    for (std::size_t i = 0; i < once.values.size(); ++i) {
        REQUIRE(std::fabs(once.values[i] - twice.values[i]) < 1e-9);
    }
}

TEST_CASE("residual_from_pair") {
    const AudioSignal signal = random_signal(6, 4000, 22050);
    SECTION("identical pair gives the zero vector") {
        const ResidualVector r =
            residual_from_pair(signal, signal, kConfig, "copy");
        for (double v : r.values) {
            REQUIRE(v == 0.0);
        }
    }
    SECTION("consistent with residual() for FIR-filtered companions") {
        const FirFilter f = design_fir(
            {FilterKind::low_pass, 2000.0, 0.0, 500.0, 60.0}, 22050);
        const ResidualVector via_pair = residual_from_pair(
            signal, apply_fir(signal, f), kConfig, "fir");
        const ResidualVector direct = residual(signal, f, kConfig);
        for (std::size_t i = 0; i < direct.values.size(); ++i) {
            REQUIRE(std::fabs(via_pair.values[i] - direct.values[i]) <=
                    1e-12);
        }
    }
    SECTION("half-amplitude companion shifts every bin by 10*log10(2)") {
        AudioSignal half = signal;
        for (double& s : half.samples) {
            s *= 0.5;
        }
        const ResidualVector r =
            residual_from_pair(signal, half, kConfig, "half");
        const double expected = 10.0 * std::log10(2.0);
        for (double v : r.values) {
            REQUIRE(v == Catch::Approx(expected).margin(1e-6));
        }
    }
    SECTION("differing durations are permitted") {
        AudioSignal longer = signal;
        longer.samples.resize(6000, 0.25);
        REQUIRE_NOTHROW(residual_from_pair(signal, longer, kConfig));
    }
    SECTION("sample-rate mismatch rejected") {
        AudioSignal other = signal;
        other.sample_rate = 16000;
        REQUIRE_THROWS_AS(residual_from_pair(signal, other, kConfig), Error);
    }
}

TEST_CASE("estimate_fingerprint statistics") {
    SECTION("single residual: mean is the residual itself") {
        const ResidualVector r = synthetic_residual(42, 8);
        const Fingerprint fp = estimate_fingerprint("one", {r});
        REQUIRE(fp.n_train == 1);
        REQUIRE(fp.mean == r.values);
    }
    SECTION("duplicated set keeps the mean") {
        std::vector<ResidualVector> rs;
        for (std::size_t i = 0; i < 10; ++i) {
            rs.push_back(synthetic_residual(derive_seed(1, "dup", i), 6));
        }
        const Fingerprint once = estimate_fingerprint("d", rs);
        std::vector<ResidualVector> tripled = rs;
        tripled.insert(tripled.end(), rs.begin(), rs.end());
        tripled.insert(tripled.end(), rs.begin(), rs.end());
        const Fingerprint thrice = estimate_fingerprint("d", tripled);
        for (std::size_t i = 0; i < once.mean.size(); ++i) {
            REQUIRE(once.mean[i] == Catch::Approx(thrice.mean[i]).margin(1e-12));
        }
    }
    SECTION("mean is bit-identical under permutation") {
        std::vector<ResidualVector> rs;
        for (std::size_t i = 0; i < 64; ++i) {
            rs.push_back(synthetic_residual(derive_seed(2, "perm", i), 12));
        }
        const Fingerprint forward = estimate_fingerprint("p", rs);
        std::reverse(rs.begin(), rs.end());
        Rng rng(9);
        rng.shuffle(rs);
        const Fingerprint shuffled = estimate_fingerprint("p", rs);
        REQUIRE(forward.mean == shuffled.mean);
    }
    SECTION("matches the two-pass oracle within 1e-10 relative") {
        const std::size_t dim = 8;
        std::vector<ResidualVector> rs;
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < 50; ++i) {
            rs.push_back(synthetic_residual(derive_seed(3, "orc", i), dim));
            rows.push_back(rs.back().values);
        }
        const double shrink = 0.0123;
        const Fingerprint fp = estimate_fingerprint("o", rs, shrink);
        std::vector<double> mean_ref, cov_ref;
        oracle::mean_and_covariance(rows, mean_ref, cov_ref);
        for (std::size_t i = 0; i < dim; ++i) {
            REQUIRE(fp.mean[i] == Catch::Approx(mean_ref[i]).epsilon(1e-10));
        }
        // Reconstruct the covariance from the stored factor: L L^T - eps I.
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k <= j; ++k) {
                    acc += fp.chol_factor[tri_index(i, k)] *
                           fp.chol_factor[tri_index(j, k)];
                }
                if (i == j) {
                    acc -= shrink;
                }
                REQUIRE(acc ==
                        Catch::Approx(cov_ref[i * dim + j]).margin(1e-8));
            }
        }
    }
    SECTION("regularized covariance is positive definite for default shrinkage") {
        for (std::uint64_t seed : {10u, 11u, 12u}) {
            REQUIRE_NOTHROW(random_fingerprint(seed, 16, 5));
        }
        // Degenerate case: fewer residuals than dimensions, all identical.
        std::vector<ResidualVector> rs(3, synthetic_residual(13, 20));
        REQUIRE_NOTHROW(estimate_fingerprint("deg", rs));
    }
    SECTION("mixed configs rejected") {
        ResidualVector a = synthetic_residual(20, 8);
        ResidualVector b = synthetic_residual(21, 8);
        b.filter_id = "other";
        REQUIRE_THROWS_AS(estimate_fingerprint("x", {a, b}), Error);
        ResidualVector c = synthetic_residual(22, 8);
        c.config.hop = 4;
        REQUIRE_THROWS_AS(estimate_fingerprint("x", {a, c}), Error);
    }
    SECTION("zero shrinkage on a singular covariance names the fix") {
        const ResidualVector r = synthetic_residual(23, 8);
        REQUIRE_THROWS_WITH(
            estimate_fingerprint("x", {r}, 0.0),
            Catch::Matchers::ContainsSubstring("shrinkage"));
    }
}

TEST_CASE("fingerprint save/load round trip is bit-exact") {
    const fs::path path = fs::temp_directory_path() / "afp_fp_roundtrip.fp";
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Fingerprint fp = random_fingerprint(seed, 5 + seed % 7, 4 + seed % 9);
        save_fingerprint(fp, path);
        const Fingerprint loaded = load_fingerprint(path);
        REQUIRE(loaded.label == fp.label);
        REQUIRE(loaded.mean == fp.mean);
        REQUIRE(loaded.chol_factor == fp.chol_factor);
        REQUIRE(loaded.shrinkage == fp.shrinkage);
        REQUIRE(loaded.n_train == fp.n_train);
        REQUIRE(loaded.sample_rate == fp.sample_rate);
        REQUIRE(loaded.stft == fp.stft);
    }
}

TEST_CASE("fingerprint persistence of designed filters") {
    const AudioSignal signal = random_signal(30, 4000, 22050);
    const FirFilter f =
        design_fir({FilterKind::low_pass, 1000.0, 0.0, 500.0, 60.0}, 22050);
    StftConfig config{128, 16, WindowKind::hann};
    std::vector<ResidualVector> rs;
    for (std::uint64_t i = 0; i < 4; ++i) {
        rs.push_back(residual(random_signal(31 + i, 4000, 22050), f, config));
    }
    const Fingerprint fp = estimate_fingerprint(
        "lp", rs, std::nullopt, FilterInfo::from_filter(f));
    const fs::path path = fs::temp_directory_path() / "afp_fp_filter.fp";
    save_fingerprint(fp, path);
    const Fingerprint loaded = load_fingerprint(path);
    REQUIRE_FALSE(loaded.filter.external);
    REQUIRE(loaded.filter.spec == f.spec);
    REQUIRE(loaded.filter.coefficients == f.coefficients);
}

TEST_CASE("fingerprint load error paths") {
    const fs::path path = fs::temp_directory_path() / "afp_fp_bad.fp";
    const Fingerprint fp = random_fingerprint(1, 6, 5);

    SECTION("version mismatch") {
        save_fingerprint(fp, path);
        std::ifstream in(path);
        nlohmann::json j;
        in >> j;
        in.close();
        j["format_version"] = 999;
        std::ofstream out(path, std::ios::trunc);
        out << j.dump();
        out.close();
        REQUIRE_THROWS_WITH(load_fingerprint(path),
                            Catch::Matchers::ContainsSubstring("version"));
    }
    SECTION("dimension inconsistency") {
        save_fingerprint(fp, path);
        std::ifstream in(path);
        nlohmann::json j;
        in >> j;
        in.close();
        j["mean"].push_back(0.25); // now longer than the config implies
        std::ofstream out(path, std::ios::trunc);
        out << j.dump();
        out.close();
        REQUIRE_THROWS_WITH(load_fingerprint(path),
                            Catch::Matchers::ContainsSubstring("dimension"));
    }
    SECTION("corrupted file") {
        std::ofstream out(path, std::ios::trunc);
        out << "{ not json";
        out.close();
        REQUIRE_THROWS_AS(load_fingerprint(path), IoError);
    }
    SECTION("missing file") {
        REQUIRE_THROWS_AS(load_fingerprint("/no/such/file.fp"), IoError);
    }
}
