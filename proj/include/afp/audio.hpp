#pragma once

// Mono waveform container, RIFF/WAV decode and encode, and SNR-controlled
// additive noise mixing.
//
// Decoding accepts PCM 16-bit, PCM 24-bit and IEEE float 32-bit, mono only.
// Multi-channel files and other encodings are rejected: any implicit downmix
// or resample would alter the spectral evidence downstream.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "afp/error.hpp"
#include "afp/rng.hpp"

namespace afp {

struct AudioSignal {
    std::vector<double> samples; // nominal range [-1, 1]
    int sample_rate = 0;         // Hz

    void validate(const std::string& context = "AudioSignal") const {
        require(sample_rate > 0, context + ": sample_rate must be positive");
        require(!samples.empty(), context + ": empty signal");
        for (double s : samples) {
            if (!std::isfinite(s)) {
                throw Error(context + ": non-finite sample value");
            }
        }
    }
};

struct NoiseSpec {
    double snr_db = 0.0;
    std::uint64_t seed = 0;
};

inline double rms(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return v.empty() ? 0.0 : std::sqrt(s / static_cast<double>(v.size()));
}

namespace detail {

inline std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) |
           (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] |
                                      (static_cast<std::uint16_t>(p[1]) << 8));
}

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

inline void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
}

} // namespace detail

/// Decode a mono WAV file (PCM16, PCM24 or float32).
inline AudioSignal load_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open WAV file: " + path.string());
    }
    std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    const std::string where = path.string();
    if (data.size() < 12 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
        std::memcmp(data.data() + 8, "WAVE", 4) != 0) {
        throw IoError("not a RIFF/WAVE file: " + where);
    }

    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint16_t bits = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;
    const unsigned char* samples_begin = nullptr;
    std::size_t samples_bytes = 0;

    std::size_t pos = 12;
    while (pos + 8 <= data.size()) {
        const unsigned char* hdr = data.data() + pos;
        const std::uint32_t chunk_size = detail::read_u32(hdr + 4);
        const std::size_t body = pos + 8;
        if (body + chunk_size > data.size()) {
            throw IoError("truncated WAV chunk in " + where);
        }
        if (std::memcmp(hdr, "fmt ", 4) == 0) {
            if (chunk_size < 16) {
                throw IoError("malformed fmt chunk in " + where);
            }
            const unsigned char* f = data.data() + body;
            format = detail::read_u16(f);
            channels = detail::read_u16(f + 2);
            rate = detail::read_u32(f + 4);
            bits = detail::read_u16(f + 14);
            if (format == 0xfffe) { // WAVE_FORMAT_EXTENSIBLE
                if (chunk_size < 40) {
                    throw IoError("malformed extensible fmt chunk in " + where);
                }
                format = detail::read_u16(f + 24); // first bytes of SubFormat
            }
            have_fmt = true;
        } else if (std::memcmp(hdr, "data", 4) == 0) {
            samples_begin = data.data() + body;
            samples_bytes = chunk_size;
        }
        pos = body + chunk_size + (chunk_size & 1); // chunks are word-aligned
    }

    if (!have_fmt || samples_begin == nullptr) {
        throw IoError("missing fmt or data chunk in " + where);
    }
    if (channels != 1) {
        throw Error("expected mono audio, got " + std::to_string(channels) +
                    " channels (no implicit downmix): " + where);
    }
    if (rate == 0) {
        throw IoError("invalid sample rate in " + where);
    }

    AudioSignal out;
    out.sample_rate = static_cast<int>(rate);
    if (format == 1 && bits == 16) {
        const std::size_t n = samples_bytes / 2;
        out.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const unsigned char* p = samples_begin + 2 * i;
            const std::int16_t v =
                static_cast<std::int16_t>(p[0] | (p[1] << 8));
            out.samples[i] = static_cast<double>(v) / 32768.0;
        }
    } else if (format == 1 && bits == 24) {
        const std::size_t n = samples_bytes / 3;
        out.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const unsigned char* p = samples_begin + 3 * i;
            std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
            if (v & 0x800000) {
                v |= ~0xffffff; // sign extend
            }
            out.samples[i] = static_cast<double>(v) / 8388608.0;
        }
    } else if (format == 3 && bits == 32) {
        const std::size_t n = samples_bytes / 4;
        out.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            float v;
            std::memcpy(&v, samples_begin + 4 * i, 4);
            out.samples[i] = static_cast<double>(v);
        }
    } else {
        throw Error("unsupported WAV encoding (format " +
                    std::to_string(format) + ", " + std::to_string(bits) +
                    " bits) in " + where);
    }
    out.validate(where);
    return out;
}

/// Encode as IEEE float 32-bit mono WAV.
inline void write_wav(const AudioSignal& signal,
                      const std::filesystem::path& path) {
    signal.validate("write_wav");
    const std::uint32_t n = static_cast<std::uint32_t>(signal.samples.size());
    std::vector<unsigned char> out;
    out.reserve(58 + 4 * static_cast<std::size_t>(n));
    const std::uint32_t data_bytes = 4 * n;
    // RIFF size = WAVE + fmt(8+18) + fact(8+4) + data(8+data_bytes)
    const std::uint32_t riff_size = 4 + 26 + 12 + 8 + data_bytes;
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    detail::put_u32(out, riff_size);
    out.insert(out.end(), {'W', 'A', 'V', 'E'});
    out.insert(out.end(), {'f', 'm', 't', ' '});
    detail::put_u32(out, 18);
    detail::put_u16(out, 3); // IEEE float
    detail::put_u16(out, 1); // mono
    detail::put_u32(out, static_cast<std::uint32_t>(signal.sample_rate));
    detail::put_u32(out, static_cast<std::uint32_t>(signal.sample_rate) * 4);
    detail::put_u16(out, 4);  // block align
    detail::put_u16(out, 32); // bits
    detail::put_u16(out, 0);  // cbSize
    out.insert(out.end(), {'f', 'a', 'c', 't'});
    detail::put_u32(out, 4);
    detail::put_u32(out, n);
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    detail::put_u32(out, data_bytes);
    for (double s : signal.samples) {
        const float v = static_cast<float>(s);
        unsigned char bytes[4];
        std::memcpy(bytes, &v, 4);
        out.insert(out.end(), bytes, bytes + 4);
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw IoError("cannot open for writing: " + path.string());
    }
    f.write(reinterpret_cast<const char*>(out.data()),
            static_cast<std::streamsize>(out.size()));
    if (!f) {
        throw IoError("write failed: " + path.string());
    }
}

/// Noise segment matched to the clean length: random contiguous crop when the
/// noise is longer (seed-controlled), tile-then-crop when shorter.
inline std::vector<double> noise_segment(const std::vector<double>& noise,
                                         std::size_t length,
                                         std::uint64_t seed) {
    require(!noise.empty(), "mix_noise: empty noise signal");
    std::vector<double> seg(length);
    if (noise.size() >= length) {
        Rng rng(derive_seed(seed, "noise-crop"));
        const std::size_t offset =
            static_cast<std::size_t>(rng.below(noise.size() - length + 1));
        std::copy(noise.begin() + static_cast<std::ptrdiff_t>(offset),
                  noise.begin() + static_cast<std::ptrdiff_t>(offset + length),
                  seg.begin());
    } else {
        for (std::size_t i = 0; i < length; ++i) {
            seg[i] = noise[i % noise.size()];
        }
    }
    return seg;
}

/// clean + alpha * noise_segment with alpha chosen so that the additive
/// components have exactly spec.snr_db of full-signal RMS SNR.
inline AudioSignal mix_noise(const AudioSignal& clean,
                             const AudioSignal& noise, const NoiseSpec& spec) {
    clean.validate("mix_noise(clean)");
    noise.validate("mix_noise(noise)");
    require(clean.sample_rate == noise.sample_rate,
            "mix_noise: sample-rate mismatch (" +
                std::to_string(clean.sample_rate) + " vs " +
                std::to_string(noise.sample_rate) + ")");
    require(std::isfinite(spec.snr_db), "mix_noise: snr_db must be finite");

    const std::vector<double> seg =
        noise_segment(noise.samples, clean.samples.size(), spec.seed);
    const double clean_rms = rms(clean.samples);
    const double seg_rms = rms(seg);
    require(clean_rms > 0.0, "mix_noise: all-zero clean signal (SNR undefined)");
    require(seg_rms > 0.0,
            "mix_noise: all-zero noise segment (SNR undefined)");

    const double alpha =
        clean_rms / (seg_rms * std::pow(10.0, spec.snr_db / 20.0));
    AudioSignal out;
    out.sample_rate = clean.sample_rate;
    out.samples.resize(clean.samples.size());
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        out.samples[i] = clean.samples[i] + alpha * seg[i];
    }
    return out;
}

} // namespace afp
