// Window closed forms, STFT against the direct-DFT reference, average
// energy properties.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "afp/rng.hpp"
#include "afp/spectrum.hpp"
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

} // namespace

TEST_CASE("make_window closed forms") {
    SECTION("hann L=4") {
        const std::vector<double> w = make_window(WindowKind::hann, 4);
        REQUIRE(w[0] == Catch::Approx(0.0).margin(1e-15));
        REQUIRE(w[1] == Catch::Approx(0.75).margin(1e-12));
        REQUIRE(w[2] == Catch::Approx(0.75).margin(1e-12));
        REQUIRE(w[3] == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("hann endpoints are zero for any L") {
        for (int L : {2, 8, 33, 128}) {
            const std::vector<double> w = make_window(WindowKind::hann, L);
            REQUIRE(w.front() == Catch::Approx(0.0).margin(1e-15));
            REQUIRE(w.back() == Catch::Approx(0.0).margin(1e-15));
        }
    }
    SECTION("hamming L=3") {
        const std::vector<double> w = make_window(WindowKind::hamming, 3);
        REQUIRE(w[0] == Catch::Approx(0.08).margin(1e-12));
        REQUIRE(w[1] == Catch::Approx(1.0).margin(1e-12));
        REQUIRE(w[2] == Catch::Approx(0.08).margin(1e-12));
    }
    SECTION("weights stay in [0, 1]") {
        for (WindowKind kind : {WindowKind::hann, WindowKind::hamming}) {
            for (double w : make_window(kind, 37)) {
                REQUIRE(w >= 0.0);
                REQUIRE(w <= 1.0);
            }
        }
    }
    SECTION("window_len < 2 rejected") {
        REQUIRE_THROWS_AS(make_window(WindowKind::hann, 1), Error);
    }
}

TEST_CASE("stft_log_magnitude basics") {
    StftConfig config{128, 32, WindowKind::hann};

    SECTION("all-zero signal sits at the -100 dB floor") {
        AudioSignal zero;
        zero.sample_rate = 8000;
        zero.samples.assign(1024, 0.0);
        const Spectrogram spec = stft_log_magnitude(zero, config);
        REQUIRE(spec.bins == 65);
        REQUIRE(spec.frames == (1024 - 128) / 32 + 1);
        for (double v : spec.values) {
            REQUIRE(v == Catch::Approx(-100.0).margin(1e-9));
        }
    }
    SECTION("pure cosine peaks at its own bin") {
        const int L = 128;
        const int m = 12;
        const int rate = 8000;
        AudioSignal tone;
        tone.sample_rate = rate;
        tone.samples.resize(1024);
        for (std::size_t n = 0; n < tone.samples.size(); ++n) {
            tone.samples[n] =
                std::cos(oracle::kTwoPi * m * static_cast<double>(n) / L);
        }
        const Spectrogram spec = stft_log_magnitude(tone, config);
        for (int t = 0; t < spec.frames; ++t) {
            int argmax = 0;
            for (int f = 1; f < spec.bins; ++f) {
                if (spec.at(f, t) > spec.at(argmax, t)) {
                    argmax = f;
                }
            }
            REQUIRE(argmax == m);
        }
    }
    SECTION("signal shorter than one frame is rejected") {
        AudioSignal tiny;
        tiny.sample_rate = 8000;
        tiny.samples.assign(100, 0.1);
        REQUIRE_THROWS_AS(stft_log_magnitude(tiny, config), Error);
    }
}

TEST_CASE("stft matches the naive direct-DFT reference within 1e-6 dB") {
    // 1 s at 8 kHz, the paper-default window/hop pairing.
    const AudioSignal signal = random_signal(1234, 8000, 8000);
    StftConfig config{128, 2, WindowKind::hann};
    const Spectrogram spec = stft_log_magnitude(signal, config);
    const std::vector<double> window = make_window(config.window_kind, 128);
    const auto reference = oracle::spectrogram(signal.samples, window, 2);
    REQUIRE(static_cast<std::size_t>(spec.frames) == reference.size());
    for (int t = 0; t < spec.frames; ++t) {
        for (int f = 0; f < spec.bins; ++f) {
            REQUIRE(spec.at(f, t) ==
                    Catch::Approx(
                        reference[static_cast<std::size_t>(t)]
                                 [static_cast<std::size_t>(f)])
                        .margin(1e-6));
        }
    }
}

TEST_CASE("stft handles non-power-of-two window lengths") {
    const AudioSignal signal = random_signal(99, 2000, 8000);
    StftConfig config{96, 16, WindowKind::hamming};
    const Spectrogram spec = stft_log_magnitude(signal, config);
    const std::vector<double> window = make_window(config.window_kind, 96);
    const auto reference = oracle::spectrogram(signal.samples, window, 16);
    for (int t = 0; t < spec.frames; ++t) {
        for (int f = 0; f < spec.bins; ++f) {
            REQUIRE(spec.at(f, t) ==
                    Catch::Approx(
                        reference[static_cast<std::size_t>(t)]
                                 [static_cast<std::size_t>(f)])
                        .margin(1e-6));
        }
    }
}

TEST_CASE("frame count formula holds across lengths and hops") {
    for (std::size_t len : {128u, 129u, 500u, 8000u}) {
        for (int hop : {1, 2, 32, 96, 128}) {
            StftConfig config{128, hop, WindowKind::hann};
            const AudioSignal s = random_signal(len * 7 + hop, len, 8000);
            const Spectrogram spec = stft_log_magnitude(s, config);
            REQUIRE(spec.frames ==
                    static_cast<int>((len - 128) / static_cast<std::size_t>(
                                                       hop)) +
                        1);
        }
    }
}

TEST_CASE("average_energy properties") {
    StftConfig config{128, 2, WindowKind::hann};

    SECTION("fixed output size regardless of duration") {
        for (std::size_t len : {200u, 1000u, 5000u}) {
            const EnergyVector e =
                average_energy(random_signal(len, len, 16000), config);
            REQUIRE(e.values.size() == 65);
        }
    }
    SECTION("equals the column mean of the spectrogram within 1e-9") {
        const AudioSignal signal = random_signal(7, 3000, 16000);
        const EnergyVector e = average_energy(signal, config);
        const Spectrogram spec = stft_log_magnitude(signal, config);
        for (int f = 0; f < spec.bins; ++f) {
            double acc = 0.0;
            for (int t = 0; t < spec.frames; ++t) {
                acc += spec.at(f, t);
            }
            REQUIRE(e.values[static_cast<std::size_t>(f)] ==
                    Catch::Approx(acc / spec.frames).margin(1e-9));
        }
    }
    SECTION("periodic signal with period == hop averages to one frame") {
        // Period 32 = hop, so every frame sees the same samples.
        StftConfig periodic_config{128, 32, WindowKind::hann};
        AudioSignal signal;
        signal.sample_rate = 8000;
        signal.samples.resize(1280);
        Rng rng(55);
        std::vector<double> period(32);
        for (double& x : period) {
            x = rng.uniform(-1.0, 1.0);
        }
        for (std::size_t n = 0; n < signal.samples.size(); ++n) {
            signal.samples[n] = period[n % 32];
        }
        const EnergyVector e = average_energy(signal, periodic_config);
        const Spectrogram spec = stft_log_magnitude(signal, periodic_config);
        for (int f = 0; f < spec.bins; ++f) {
            REQUIRE(e.values[static_cast<std::size_t>(f)] ==
                    Catch::Approx(spec.at(f, 0)).margin(1e-9));
        }
    }
    SECTION("all-zero signal gives a constant -100 dB vector") {
        AudioSignal zero;
        zero.sample_rate = 8000;
        zero.samples.assign(1000, 0.0);
        const EnergyVector e = average_energy(zero, config);
        for (double v : e.values) {
            REQUIRE(v == Catch::Approx(-100.0).margin(1e-9));
        }
    }
}
