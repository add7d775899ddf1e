// FIR design templates, convolution semantics, response measurements.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "afp/fir.hpp"
#include "afp/rng.hpp"
#include "oracles.hpp"

using namespace afp;

namespace {

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

double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s;
}

const FilterSpec kPaperLowPass{FilterKind::low_pass, 1000.0, 0.0, 500.0, 60.0};

} // namespace

TEST_CASE("design_fir basic gains") {
    SECTION("low-pass DC gain is unity") {
        const FirFilter f = design_fir(kPaperLowPass, 22050);
        REQUIRE(sum(f.coefficients) >= 0.999);
        REQUIRE(sum(f.coefficients) <= 1.001);
        REQUIRE(f.coefficients.size() % 2 == 1);
    }
    SECTION("high-pass DC gain is null") {
        const FirFilter f = design_fir(
            {FilterKind::high_pass, 3000.0, 0.0, 500.0, 60.0}, 22050);
        REQUIRE(std::fabs(sum(f.coefficients)) <= 1e-3);
    }
    SECTION("band-stop DC gain is unity, band-pass null") {
        const FirFilter bs = design_fir(
            {FilterKind::band_stop, 4000.0, 7000.0, 500.0, 60.0}, 22050);
        REQUIRE(std::fabs(sum(bs.coefficients) - 1.0) <= 1e-3);
        const FirFilter bp = design_fir(
            {FilterKind::band_pass, 4000.0, 7000.0, 500.0, 60.0}, 22050);
        REQUIRE(std::fabs(sum(bp.coefficients)) <= 1e-3);
    }
}

TEST_CASE("designed filters are linear-phase symmetric") {
    for (const FilterSpec spec :
         {kPaperLowPass, FilterSpec{FilterKind::high_pass, 3000.0, 0.0, 500.0, 60.0},
          FilterSpec{FilterKind::band_pass, 4000.0, 7000.0, 500.0, 60.0},
          FilterSpec{FilterKind::band_stop, 5000.0, 6000.0, 500.0, 60.0}}) {
        const FirFilter f = design_fir(spec, 22050);
        const std::size_t k = f.coefficients.size();
        for (std::size_t i = 0; i < k / 2; ++i) {
            REQUIRE(std::fabs(f.coefficients[i] -
                              f.coefficients[k - 1 - i]) <= 1e-12);
        }
    }
}

TEST_CASE("paper low-pass meets its response template") {
    const FirFilter f = design_fir(kPaperLowPass, 22050);
    SECTION("at least 55 dB attenuation at the stopband edge") {
        REQUIRE(gain_at(f, 1500.0) <= -55.0);
    }
    SECTION("at most 1 dB deviation through the passband") {
        for (double freq = 50.0; freq <= 1000.0; freq += 50.0) {
            REQUIRE(gain_at(f, freq) >= -1.0);
            REQUIRE(gain_at(f, freq) <= 1.0);
        }
    }
}

TEST_CASE("band filters meet their response templates") {
    SECTION("band-pass 4-7 kHz") {
        const FirFilter f = design_fir(
            {FilterKind::band_pass, 4000.0, 7000.0, 500.0, 60.0}, 22050);
        REQUIRE(gain_at(f, 5500.0) >= -1.0);
        REQUIRE(gain_at(f, 1000.0) <= -55.0);
        REQUIRE(gain_at(f, 3500.0) <= -55.0);
        REQUIRE(gain_at(f, 7500.0) <= -55.0);
    }
    SECTION("band-stop 4-7 kHz") {
        const FirFilter f = design_fir(
            {FilterKind::band_stop, 4000.0, 7000.0, 500.0, 60.0}, 22050);
        REQUIRE(gain_at(f, 5500.0) <= -55.0);
        REQUIRE(gain_at(f, 4000.0) <= -55.0);
        REQUIRE(gain_at(f, 7000.0) <= -55.0);
        REQUIRE(std::fabs(gain_at(f, 1000.0)) <= 1.0);
        REQUIRE(std::fabs(gain_at(f, 9000.0)) <= 1.0);
    }
}

TEST_CASE("design_fir rejects invalid specs") {
    REQUIRE_THROWS_AS(
        design_fir({FilterKind::low_pass, 0.0, 0.0, 500.0, 60.0}, 22050),
        Error);
    REQUIRE_THROWS_AS(
        design_fir({FilterKind::low_pass, 12000.0, 0.0, 500.0, 60.0}, 22050),
        Error);
    // transition band would cross Nyquist
    REQUIRE_THROWS_AS(
        design_fir({FilterKind::low_pass, 10800.0, 0.0, 500.0, 60.0}, 22050),
        Error);
    // transition band would cross 0
    REQUIRE_THROWS_AS(
        design_fir({FilterKind::high_pass, 300.0, 0.0, 500.0, 60.0}, 22050),
        Error);
    REQUIRE_THROWS_AS(
        design_fir({FilterKind::band_pass, 7000.0, 4000.0, 500.0, 60.0},
                   22050),
        Error);
    REQUIRE_THROWS_AS(
        design_fir({FilterKind::low_pass, 1000.0, 0.0, 500.0, 10.0}, 22050),
        Error);
}

TEST_CASE("apply_fir semantics") {
    SECTION("identity kernel") {
        const AudioSignal x = random_signal(3, 512, 8000);
        FirFilter h;
        h.coefficients = {1.0};
        h.sample_rate = 8000;
        const AudioSignal y = apply_fir(x, h);
        REQUIRE(y.samples == x.samples);
    }
    SECTION("two-tap averager with zero padding") {
        AudioSignal x;
        x.sample_rate = 8000;
        x.samples = {1.0, 1.0, 1.0, 1.0};
        FirFilter h;
        h.coefficients = {0.5, 0.5};
        h.sample_rate = 8000;
        const AudioSignal y = apply_fir(x, h);
        REQUIRE(y.samples == std::vector<double>{0.5, 1.0, 1.0, 1.0});
    }
    SECTION("matches the naive double-loop convolution within 1e-9") {
        const AudioSignal x = random_signal(17, 4096, 22050);
        const FirFilter f = design_fir(kPaperLowPass, 22050);
        const AudioSignal y = apply_fir(x, f);
        const std::vector<double> reference =
            oracle::convolve(x.samples, f.coefficients);
        REQUIRE(y.samples.size() == reference.size());
        for (std::size_t i = 0; i < y.samples.size(); ++i) {
            REQUIRE(std::fabs(y.samples[i] - reference[i]) <= 1e-9);
        }
    }
    SECTION("linearity") {
        Rng rng(77);
        const AudioSignal x = random_signal(18, 1024, 22050);
        const AudioSignal z = random_signal(19, 1024, 22050);
        const FirFilter f = design_fir(kPaperLowPass, 22050);
        const double a = rng.uniform(-2.0, 2.0);
        const double b = rng.uniform(-2.0, 2.0);
        AudioSignal combo;
        combo.sample_rate = 22050;
        combo.samples.resize(1024);
        for (std::size_t i = 0; i < 1024; ++i) {
            combo.samples[i] = a * x.samples[i] + b * z.samples[i];
        }
        const AudioSignal lhs = apply_fir(combo, f);
        const AudioSignal fx = apply_fir(x, f);
        const AudioSignal fz = apply_fir(z, f);
        for (std::size_t i = 0; i < 1024; ++i) {
            REQUIRE(std::fabs(lhs.samples[i] -
                              (a * fx.samples[i] + b * fz.samples[i])) <=
                    1e-9);
        }
    }
    SECTION("sample-rate mismatch rejected") {
        const AudioSignal x = random_signal(20, 256, 8000);
        const FirFilter f = design_fir(kPaperLowPass, 22050);
        REQUIRE_THROWS_AS(apply_fir(x, f), Error);
    }
}

TEST_CASE("frequency_response") {
    SECTION("identity filter is flat at 0 dB") {
        FirFilter h;
        h.coefficients = {1.0};
        h.sample_rate = 8000;
        for (const auto& [freq, gain] : frequency_response(h, 64)) {
            REQUIRE(gain == Catch::Approx(0.0).margin(1e-12));
        }
    }
    SECTION("two-tap averager nulls at Nyquist") {
        FirFilter h;
        h.coefficients = {0.5, 0.5};
        h.sample_rate = 8000;
        const auto response = frequency_response(h, 65);
        REQUIRE(response.back().first == Catch::Approx(4000.0));
        REQUIRE(response.back().second <= -200.0);
    }
    SECTION("covers [0, Nyquist] inclusive") {
        FirFilter h;
        h.coefficients = {1.0};
        h.sample_rate = 16000;
        const auto response = frequency_response(h, 33);
        REQUIRE(response.front().first == 0.0);
        REQUIRE(response.back().first == 8000.0);
        REQUIRE(response.size() == 33);
    }
}
