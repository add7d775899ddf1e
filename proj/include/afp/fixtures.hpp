#pragma once

// Deterministic surrogate corpora: desk-scale stand-ins for real synthesis
// systems. Each "system" is a jittered harmonic pulse train plus noise pushed
// through a fixed coloration filter, so systems differ in spectral envelope
// the way distinct vocoders do, while clips within a system differ only by
// seed. A shared neutral coloration plays the role of real speech.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "afp/audio.hpp"
#include "afp/error.hpp"
#include "afp/fir.hpp"
#include "afp/manifest.hpp"
#include "afp/rng.hpp"

namespace afp {

struct SurrogateSystemSpec {
    std::string system_id;
    FilterSpec coloration;
    double harmonic_f0 = 150.0; // Hz
    double jitter = 0.02;       // relative f0 wobble
    double clip_seconds = 0.5;
    int sample_rate = 16000;

    void validate() const {
        require(!system_id.empty(), "SurrogateSystemSpec: empty system_id");
        require(clip_seconds > 0.0,
                "SurrogateSystemSpec: clip_seconds must be positive");
        require(harmonic_f0 > 50.0 && harmonic_f0 < 400.0,
                "SurrogateSystemSpec: harmonic_f0 must be in (50, 400) Hz");
        require(sample_rate > 0,
                "SurrogateSystemSpec: sample_rate must be positive");
        coloration.validate(sample_rate);
    }
};

/// Three stock systems with colorations that emphasize different parts of
/// the spectrum. The attenuation is deliberately moderate (24 dB): real
/// vocoders differ by band emphases of a few tens of dB at most, and bands
/// carved out to -60 dB would be wiped out by even light additive noise,
/// which defeats the robustness protocol.
inline std::vector<SurrogateSystemSpec>
default_surrogate_specs(int sample_rate = 16000, double clip_seconds = 0.5) {
    const double nyquist = sample_rate / 2.0;
    require(nyquist > 7000.0,
            "default_surrogate_specs: sample rate too low for the stock "
            "colorations (need Nyquist > 7 kHz)");
    std::vector<SurrogateSystemSpec> specs(3);
    specs[0].system_id = "SYS_A";
    specs[0].coloration = {FilterKind::low_pass, 2600.0, 0.0, 600.0, 24.0};
    specs[0].harmonic_f0 = 112.0;
    specs[0].jitter = 0.018;
    specs[1].system_id = "SYS_B";
    specs[1].coloration = {FilterKind::band_stop, 3200.0, 5200.0, 600.0, 24.0};
    specs[1].harmonic_f0 = 168.0;
    specs[1].jitter = 0.02;
    specs[2].system_id = "SYS_C";
    specs[2].coloration = {FilterKind::high_pass, 900.0, 0.0, 500.0, 24.0};
    specs[2].harmonic_f0 = 236.0;
    specs[2].jitter = 0.022;
    for (SurrogateSystemSpec& s : specs) {
        s.clip_seconds = clip_seconds;
        s.sample_rate = sample_rate;
    }
    return specs;
}

/// Neutral coloration used for the surrogate "real" clips: nearly full-band.
inline FilterSpec neutral_coloration(int sample_rate) {
    const double nyquist = sample_rate / 2.0;
    return {FilterKind::low_pass, 0.88 * nyquist, 0.0, 0.06 * nyquist, 24.0};
}

namespace detail {

/// Jittered glottal-style pulse train plus a white noise floor.
inline AudioSignal synthesize_excitation(double f0, double jitter,
                                         std::size_t n_samples,
                                         int sample_rate, Rng& rng) {
    AudioSignal out;
    out.sample_rate = sample_rate;
    out.samples.assign(n_samples, 0.0);
    double t = 0.0;
    while (t < static_cast<double>(n_samples)) {
        const std::size_t idx = static_cast<std::size_t>(t);
        if (idx < n_samples) {
            out.samples[idx] += 1.0;
        }
        const double period =
            static_cast<double>(sample_rate) / f0 * (1.0 + jitter * rng.normal());
        t += period > 4.0 ? period : 4.0;
    }
    for (std::size_t i = 0; i < n_samples; ++i) {
        out.samples[i] += 0.12 * rng.normal();
    }
    return out;
}

inline void peak_normalize(AudioSignal& signal, double peak) {
    double max_abs = 0.0;
    for (double s : signal.samples) {
        max_abs = std::max(max_abs, std::fabs(s));
    }
    require(max_abs > 0.0, "peak_normalize: silent clip");
    const double g = peak / max_abs;
    for (double& s : signal.samples) {
        s *= g;
    }
}

inline AudioSignal render_clip(const FirFilter& coloration, double f0,
                               double jitter, double clip_seconds,
                               int sample_rate, std::uint64_t clip_seed) {
    Rng rng(clip_seed);
    const std::size_t n =
        static_cast<std::size_t>(clip_seconds * sample_rate);
    AudioSignal excitation =
        synthesize_excitation(f0, jitter, n, sample_rate, rng);
    AudioSignal clip = apply_fir(excitation, coloration);
    peak_normalize(clip, 0.9);
    return clip;
}

} // namespace detail

/// Write one WAV per clip plus `manifest.csv` under out_dir. Per-clip seeds
/// derive from (seed, system_id, index), so regeneration with the same
/// arguments is byte-identical and clip generation parallelizes freely.
inline Manifest
generate_surrogate_corpus(const std::vector<SurrogateSystemSpec>& specs,
                          int n_per_system, int n_real, std::uint64_t seed,
                          const std::filesystem::path& out_dir) {
    require(!specs.empty(), "generate_surrogate_corpus: no system specs");
    require(n_per_system >= 10,
            "generate_surrogate_corpus: n_per_system must be >= 10");
    require(n_real >= 0, "generate_surrogate_corpus: n_real must be >= 0");
    std::set<std::string> ids;
    for (const SurrogateSystemSpec& s : specs) {
        s.validate();
        require(s.system_id != "real",
                "generate_surrogate_corpus: 'real' is reserved");
        require(ids.insert(s.system_id).second,
                "generate_surrogate_corpus: duplicate system_id '" +
                    s.system_id + "'");
        require(s.sample_rate == specs.front().sample_rate,
                "generate_surrogate_corpus: mixed sample rates");
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw IoError("cannot create directory " + out_dir.string() + ": " +
                      ec.message());
    }

    Manifest manifest;
    manifest.base_dir = out_dir;

    for (const SurrogateSystemSpec& spec : specs) {
        const FirFilter coloration =
            design_fir(spec.coloration, spec.sample_rate);
        const std::filesystem::path system_dir = out_dir / spec.system_id;
        std::filesystem::create_directories(system_dir, ec);
        if (ec) {
            throw IoError("cannot create directory " + system_dir.string() +
                          ": " + ec.message());
        }
        for (int j = 0; j < n_per_system; ++j) {
            const AudioSignal clip = detail::render_clip(
                coloration, spec.harmonic_f0, spec.jitter, spec.clip_seconds,
                spec.sample_rate,
                derive_seed(seed, spec.system_id,
                            static_cast<std::uint64_t>(j)));
            char name[64];
            std::snprintf(name, sizeof(name), "%s_%04d.wav",
                          spec.system_id.c_str(), j);
            write_wav(clip, system_dir / name);
            manifest.entries.push_back(
                {(std::filesystem::path(spec.system_id) / name).string(),
                 spec.system_id, Split::none});
        }
    }

    if (n_real > 0) {
        const SurrogateSystemSpec& ref = specs.front();
        const FirFilter coloration =
            design_fir(neutral_coloration(ref.sample_rate), ref.sample_rate);
        const std::filesystem::path real_dir = out_dir / "real";
        std::filesystem::create_directories(real_dir, ec);
        if (ec) {
            throw IoError("cannot create directory " + real_dir.string() +
                          ": " + ec.message());
        }
        for (int j = 0; j < n_real; ++j) {
            const std::uint64_t clip_seed =
                derive_seed(seed, "real", static_cast<std::uint64_t>(j));
            // Real speech has many voices; vary f0 per clip.
            Rng f0_rng(derive_seed(clip_seed, "f0"));
            const double f0 = f0_rng.uniform(105.0, 280.0);
            const AudioSignal clip =
                detail::render_clip(coloration, f0, 0.03, ref.clip_seconds,
                                    ref.sample_rate, clip_seed);
            char name[64];
            std::snprintf(name, sizeof(name), "real_%04d.wav", j);
            write_wav(clip, real_dir / name);
            manifest.entries.push_back(
                {(std::filesystem::path("real") / name).string(), "real",
                 Split::none});
        }
    }

    save_manifest(manifest, out_dir / "manifest.csv");
    return manifest;
}

/// Broadband noise clips for robustness experiments; written under
/// out_dir/noise with their own `noise_manifest.csv`.
inline Manifest generate_noise_corpus(int n_clips, double clip_seconds,
                                      int sample_rate, std::uint64_t seed,
                                      const std::filesystem::path& out_dir) {
    require(n_clips >= 1, "generate_noise_corpus: n_clips must be >= 1");
    require(clip_seconds > 0.0,
            "generate_noise_corpus: clip_seconds must be positive");
    std::error_code ec;
    const std::filesystem::path noise_dir = out_dir / "noise";
    std::filesystem::create_directories(noise_dir, ec);
    if (ec) {
        throw IoError("cannot create directory " + noise_dir.string() + ": " +
                      ec.message());
    }
    const double nyquist = sample_rate / 2.0;
    const FirFilter shaping = design_fir(
        {FilterKind::low_pass, 0.72 * nyquist, 0.0, 0.1 * nyquist, 60.0},
        sample_rate);
    Manifest manifest;
    manifest.base_dir = out_dir;
    const std::size_t n =
        static_cast<std::size_t>(clip_seconds * sample_rate);
    for (int j = 0; j < n_clips; ++j) {
        Rng rng(derive_seed(seed, "noise-corpus", static_cast<std::uint64_t>(j)));
        AudioSignal white;
        white.sample_rate = sample_rate;
        white.samples.resize(n);
        for (double& s : white.samples) {
            s = rng.normal();
        }
        AudioSignal clip = apply_fir(white, shaping);
        detail::peak_normalize(clip, 0.9);
        char name[64];
        std::snprintf(name, sizeof(name), "noise_%04d.wav", j);
        write_wav(clip, noise_dir / name);
        manifest.entries.push_back(
            {(std::filesystem::path("noise") / name).string(), "noise",
             Split::none});
    }
    save_manifest(manifest, out_dir / "noise_manifest.csv");
    return manifest;
}

} // namespace afp
