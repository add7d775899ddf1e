#pragma once

// Short-time spectral analysis: the log-magnitude spectrogram and its
// per-bin time average, the fixed-size representation every residual and
// fingerprint downstream is built from.
//
// Conventions: frames start at offsets 0, hop, 2*hop, ...; only full frames
// are used; magnitudes are floored at 1e-10 before the 10*log10 transform so
// all values stay finite.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "afp/audio.hpp"
#include "afp/error.hpp"

namespace afp {

enum class WindowKind { hann, hamming };

inline std::string to_string(WindowKind kind) {
    return kind == WindowKind::hann ? "hann" : "hamming";
}

inline WindowKind window_kind_from_string(const std::string& s) {
    if (s == "hann") {
        return WindowKind::hann;
    }
    if (s == "hamming") {
        return WindowKind::hamming;
    }
    throw Error("unknown window kind: " + s);
}

struct StftConfig {
    int window_len = 128;
    int hop = 2;
    WindowKind window_kind = WindowKind::hann;

    int bins() const { return window_len / 2 + 1; }

    void validate() const {
        require(window_len >= 2, "StftConfig: window_len must be >= 2");
        require(window_len % 2 == 0, "StftConfig: window_len must be even");
        require(hop >= 1 && hop <= window_len,
                "StftConfig: hop must be in [1, window_len]");
    }

    bool operator==(const StftConfig& o) const {
        return window_len == o.window_len && hop == o.hop &&
               window_kind == o.window_kind;
    }

    std::string describe() const {
        return std::to_string(window_len) + ":" + std::to_string(hop) + ":" +
               to_string(window_kind);
    }
};

/// Magnitude floor applied before the log transform.
inline constexpr double kMagnitudeFloor = 1e-10;

inline std::vector<double> make_window(WindowKind kind, int window_len) {
    require(window_len >= 2, "make_window: window_len must be >= 2");
    std::vector<double> w(static_cast<std::size_t>(window_len));
    const double denom = static_cast<double>(window_len - 1);
    constexpr double two_pi = 6.283185307179586476925286766559;
    for (int k = 0; k < window_len; ++k) {
        const double c = std::cos(two_pi * static_cast<double>(k) / denom);
        w[static_cast<std::size_t>(k)] =
            kind == WindowKind::hann ? 0.5 * (1.0 - c) : 0.54 - 0.46 * c;
    }
    return w;
}

struct Spectrogram {
    // Row-major F x T: values[f * frames + t], decibels.
    std::vector<double> values;
    int bins = 0;
    int frames = 0;
    StftConfig config;
    int sample_rate = 0;

    double at(int f, int t) const {
        return values[static_cast<std::size_t>(f) *
                          static_cast<std::size_t>(frames) +
                      static_cast<std::size_t>(t)];
    }
};

struct EnergyVector {
    std::vector<double> values; // length F, decibels
    StftConfig config;
    int sample_rate = 0;
};

namespace detail {

/// Radix-2 DIT FFT plan for power-of-two sizes, with a direct-DFT fallback
/// for other even lengths.
class FftPlan {
public:
    explicit FftPlan(int n) : n_(n) {
        pow2_ = (n > 0) && ((n & (n - 1)) == 0);
        constexpr double two_pi = 6.283185307179586476925286766559;
        if (pow2_) {
            twiddles_.resize(static_cast<std::size_t>(n / 2));
            for (int k = 0; k < n / 2; ++k) {
                const double a = -two_pi * static_cast<double>(k) /
                                 static_cast<double>(n);
                twiddles_[static_cast<std::size_t>(k)] = {std::cos(a),
                                                          std::sin(a)};
            }
            rev_.resize(static_cast<std::size_t>(n));
            int bits = 0;
            while ((1 << bits) < n) {
                ++bits;
            }
            for (int i = 0; i < n; ++i) {
                int r = 0;
                for (int b = 0; b < bits; ++b) {
                    r = (r << 1) | ((i >> b) & 1);
                }
                rev_[static_cast<std::size_t>(i)] = r;
            }
        } else {
            table_.resize(static_cast<std::size_t>(n));
            for (int k = 0; k < n; ++k) {
                const double a = -two_pi * static_cast<double>(k) /
                                 static_cast<double>(n);
                table_[static_cast<std::size_t>(k)] = {std::cos(a),
                                                       std::sin(a)};
            }
        }
    }

    /// In-place transform of a length-n complex buffer.
    void run(std::vector<std::complex<double>>& buf) const {
        if (pow2_) {
            for (int i = 0; i < n_; ++i) {
                const int j = rev_[static_cast<std::size_t>(i)];
                if (i < j) {
                    std::swap(buf[static_cast<std::size_t>(i)],
                              buf[static_cast<std::size_t>(j)]);
                }
            }
            for (int len = 2; len <= n_; len <<= 1) {
                const int half = len / 2;
                const int step = n_ / len;
                for (int start = 0; start < n_; start += len) {
                    for (int k = 0; k < half; ++k) {
                        const std::complex<double> w =
                            twiddles_[static_cast<std::size_t>(k * step)];
                        auto& a = buf[static_cast<std::size_t>(start + k)];
                        auto& b =
                            buf[static_cast<std::size_t>(start + k + half)];
                        const std::complex<double> t = w * b;
                        b = a - t;
                        a += t;
                    }
                }
            }
        } else {
            std::vector<std::complex<double>> out(
                static_cast<std::size_t>(n_));
            for (int f = 0; f < n_; ++f) {
                std::complex<double> acc{0.0, 0.0};
                for (int k = 0; k < n_; ++k) {
                    acc += buf[static_cast<std::size_t>(k)] *
                           table_[static_cast<std::size_t>(
                               (static_cast<long long>(f) * k) % n_)];
                }
                out[static_cast<std::size_t>(f)] = acc;
            }
            buf = std::move(out);
        }
    }

private:
    int n_;
    bool pow2_;
    std::vector<std::complex<double>> twiddles_;
    std::vector<int> rev_;
    std::vector<std::complex<double>> table_; // direct-DFT fallback
};

} // namespace detail

inline int frame_count(std::size_t signal_len, const StftConfig& config) {
    if (signal_len < static_cast<std::size_t>(config.window_len)) {
        return 0;
    }
    return static_cast<int>((signal_len -
                             static_cast<std::size_t>(config.window_len)) /
                            static_cast<std::size_t>(config.hop)) +
           1;
}

namespace detail {

/// Windowed per-frame log magnitudes, 10*log10(max(|X|, 1e-10)) per bin,
/// delivered through sink(t, row) with row valid only during the call.
/// Frames are real, so two of them ride one complex transform (even/odd
/// packing) and the halves are separated by conjugate symmetry.
template <typename Sink>
inline void stft_rows(const AudioSignal& signal, const StftConfig& config,
                      Sink&& sink) {
    config.validate();
    signal.validate("stft_log_magnitude");
    const int T = frame_count(signal.samples.size(), config);
    require(T >= 1, "stft_log_magnitude: signal shorter than one frame (" +
                        std::to_string(signal.samples.size()) + " < " +
                        std::to_string(config.window_len) + " samples)");
    const int L = config.window_len;
    const int F = config.bins();
    const std::vector<double> window = make_window(config.window_kind, L);
    const FftPlan plan(L);

    // 10*log10(|X|) computed as 5*log10(|X|^2) to skip the square root.
    constexpr double power_floor = kMagnitudeFloor * kMagnitudeFloor;
    const auto to_db = [](double p) {
        return 5.0 * std::log10(p < power_floor ? power_floor : p);
    };

    std::vector<std::complex<double>> buf(static_cast<std::size_t>(L));
    std::vector<double> row_a(static_cast<std::size_t>(F));
    std::vector<double> row_b(static_cast<std::size_t>(F));
    const double* x = signal.samples.data();
    const std::size_t hop = static_cast<std::size_t>(config.hop);

    int t = 0;
    for (; t + 1 < T; t += 2) {
        const double* a = x + static_cast<std::size_t>(t) * hop;
        const double* b = a + hop;
        for (int k = 0; k < L; ++k) {
            const double w = window[static_cast<std::size_t>(k)];
            buf[static_cast<std::size_t>(k)] = {a[k] * w, b[k] * w};
        }
        plan.run(buf);
        for (int f = 0; f < F; ++f) {
            const std::complex<double> zf = buf[static_cast<std::size_t>(f)];
            const std::complex<double> zm =
                buf[static_cast<std::size_t>(f == 0 ? 0 : L - f)];
            const double re_a = 0.5 * (zf.real() + zm.real());
            const double im_a = 0.5 * (zf.imag() - zm.imag());
            const double re_b = 0.5 * (zf.imag() + zm.imag());
            const double im_b = 0.5 * (zm.real() - zf.real());
            row_a[static_cast<std::size_t>(f)] =
                to_db(re_a * re_a + im_a * im_a);
            row_b[static_cast<std::size_t>(f)] =
                to_db(re_b * re_b + im_b * im_b);
        }
        sink(t, row_a.data());
        sink(t + 1, row_b.data());
    }
    if (t < T) { // odd trailing frame
        const double* a = x + static_cast<std::size_t>(t) * hop;
        for (int k = 0; k < L; ++k) {
            buf[static_cast<std::size_t>(k)] = {
                a[k] * window[static_cast<std::size_t>(k)], 0.0};
        }
        plan.run(buf);
        for (int f = 0; f < F; ++f) {
            const std::complex<double>& v = buf[static_cast<std::size_t>(f)];
            row_a[static_cast<std::size_t>(f)] =
                to_db(v.real() * v.real() + v.imag() * v.imag());
        }
        sink(t, row_a.data());
    }
}

} // namespace detail

/// Windowed log-magnitude spectrogram, 10*log10(max(|X|, 1e-10)).
inline Spectrogram stft_log_magnitude(const AudioSignal& signal,
                                      const StftConfig& config) {
    Spectrogram spec;
    spec.bins = config.bins();
    spec.frames = frame_count(signal.samples.size(), config);
    spec.config = config;
    spec.sample_rate = signal.sample_rate;
    spec.values.resize(static_cast<std::size_t>(spec.bins) *
                       static_cast<std::size_t>(std::max(spec.frames, 0)));
    const std::size_t T = static_cast<std::size_t>(spec.frames);
    detail::stft_rows(signal, config, [&](int t, const double* row) {
        for (int f = 0; f < spec.bins; ++f) {
            spec.values[static_cast<std::size_t>(f) * T +
                        static_cast<std::size_t>(t)] = row[f];
        }
    });
    return spec;
}

/// Per-bin time average of the log-magnitude spectrogram: a fixed-size
/// summary independent of clip duration.
inline EnergyVector average_energy(const AudioSignal& signal,
                                   const StftConfig& config) {
    EnergyVector out;
    out.config = config;
    out.sample_rate = signal.sample_rate;
    const std::size_t bins = static_cast<std::size_t>(config.bins());
    std::vector<double> acc(bins, 0.0);
    int frames = 0;
    detail::stft_rows(signal, config, [&](int, const double* row) {
        for (std::size_t f = 0; f < bins; ++f) {
            acc[f] += row[f];
        }
        ++frames;
    });
    out.values.resize(bins);
    const double inv_t = 1.0 / static_cast<double>(frames);
    for (std::size_t f = 0; f < bins; ++f) {
        out.values[f] = acc[f] * inv_t;
    }
    return out;
}

} // namespace afp
