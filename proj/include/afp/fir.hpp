#pragma once

// Linear-phase FIR design and application.
//
// All filters are Kaiser windowed-sinc designs with an odd tap count
// (type I). The stated edges always delimit the nominal band: the passband
// for low/high/band-pass kinds, the rejected band for band-stop. Transition
// bands of width `transition_width` extend outward from those edges, so a
// low-pass with edge 1000 and transition 500 is flat to 1 kHz and reaches
// full stopband attenuation at 1.5 kHz.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "afp/audio.hpp"
#include "afp/error.hpp"

namespace afp {

enum class FilterKind { low_pass, high_pass, band_pass, band_stop };

inline std::string to_string(FilterKind kind) {
    switch (kind) {
    case FilterKind::low_pass:
        return "low_pass";
    case FilterKind::high_pass:
        return "high_pass";
    case FilterKind::band_pass:
        return "band_pass";
    case FilterKind::band_stop:
        return "band_stop";
    }
    return "?";
}

inline FilterKind filter_kind_from_string(const std::string& s) {
    if (s == "low_pass" || s == "lowpass") {
        return FilterKind::low_pass;
    }
    if (s == "high_pass" || s == "highpass") {
        return FilterKind::high_pass;
    }
    if (s == "band_pass" || s == "bandpass") {
        return FilterKind::band_pass;
    }
    if (s == "band_stop" || s == "bandstop") {
        return FilterKind::band_stop;
    }
    throw Error("unknown filter kind: " + s);
}

struct FilterSpec {
    FilterKind kind = FilterKind::low_pass;
    double edge_lo = 0.0;           // Hz; the only edge for low/high pass
    double edge_hi = 0.0;           // Hz; band kinds only
    double transition_width = 0.0;  // Hz
    double stopband_atten_db = 60.0;

    bool is_band() const {
        return kind == FilterKind::band_pass || kind == FilterKind::band_stop;
    }

    void validate(int sample_rate) const {
        require(sample_rate > 0, "FilterSpec: sample rate must be positive");
        const double nyquist = sample_rate / 2.0;
        require(transition_width > 0.0,
                "FilterSpec: transition_width must be positive");
        require(stopband_atten_db >= 20.0,
                "FilterSpec: stopband_atten_db must be >= 20");
        require(edge_lo > 0.0 && edge_lo < nyquist,
                "FilterSpec: edge out of (0, Nyquist)");
        if (is_band()) {
            require(edge_hi > 0.0 && edge_hi < nyquist,
                    "FilterSpec: edge out of (0, Nyquist)");
            require(edge_lo < edge_hi,
                    "FilterSpec: edge_lo must be below edge_hi");
            require(edge_lo - transition_width > 0.0,
                    "FilterSpec: transition band crosses 0 Hz");
            require(edge_hi + transition_width < nyquist,
                    "FilterSpec: transition band crosses Nyquist");
        } else if (kind == FilterKind::low_pass) {
            require(edge_lo + transition_width < nyquist,
                    "FilterSpec: transition band crosses Nyquist");
        } else { // high_pass
            require(edge_lo - transition_width > 0.0,
                    "FilterSpec: transition band crosses 0 Hz");
        }
    }

    bool operator==(const FilterSpec& o) const {
        return kind == o.kind && edge_lo == o.edge_lo && edge_hi == o.edge_hi &&
               transition_width == o.transition_width &&
               stopband_atten_db == o.stopband_atten_db;
    }

    std::string describe() const {
        std::string s = to_string(kind) + ":" + std::to_string(edge_lo);
        if (is_band()) {
            s += ":" + std::to_string(edge_hi);
        }
        s += ":tw" + std::to_string(transition_width) + ":att" +
             std::to_string(stopband_atten_db);
        return s;
    }
};

struct FirFilter {
    std::vector<double> coefficients;
    int sample_rate = 0;
    FilterSpec spec{};        // meaningful only when designed
    std::string id = "custom";
};

namespace detail {

/// Zeroth-order modified Bessel function of the first kind (series).
inline double bessel_i0(double x) {
    const double y = x * x / 4.0;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        term *= y / (static_cast<double>(k) * static_cast<double>(k));
        sum += term;
        if (term < sum * 1e-17) {
            break;
        }
    }
    return sum;
}

inline double kaiser_beta(double atten_db) {
    if (atten_db > 50.0) {
        return 0.1102 * (atten_db - 8.7);
    }
    if (atten_db > 21.0) {
        return 0.5842 * std::pow(atten_db - 21.0, 0.4) +
               0.07886 * (atten_db - 21.0);
    }
    return 0.0;
}

/// Kaiser tap-count estimate, rounded up to the next odd value.
inline int kaiser_length(double atten_db, double transition_rad) {
    double taps = atten_db > 21.0
                      ? (atten_db - 7.95) / (2.285 * transition_rad) + 1.0
                      : 5.79 / transition_rad + 1.0;
    int n = static_cast<int>(std::ceil(taps));
    if (n < 3) {
        n = 3;
    }
    if (n % 2 == 0) {
        ++n;
    }
    return n;
}

/// Kaiser-windowed sinc low-pass prototype with unit DC gain.
inline std::vector<double> lowpass_prototype(double cutoff_hz, int taps,
                                             double beta, int sample_rate) {
    const int mid = (taps - 1) / 2;
    const double fc = cutoff_hz / static_cast<double>(sample_rate);
    constexpr double two_pi = 6.283185307179586476925286766559;
    const double denom = bessel_i0(beta);
    std::vector<double> h(static_cast<std::size_t>(taps));
    for (int n = 0; n < taps; ++n) {
        const double m = static_cast<double>(n - mid);
        const double x = two_pi * fc * m;
        const double sinc = std::fabs(x) < 1e-12 ? 1.0 : std::sin(x) / x;
        const double r = 2.0 * static_cast<double>(n) /
                             static_cast<double>(taps - 1) -
                         1.0;
        const double w = bessel_i0(beta * std::sqrt(1.0 - r * r)) / denom;
        h[static_cast<std::size_t>(n)] = 2.0 * fc * sinc * w;
    }
    double sum = 0.0;
    for (double v : h) {
        sum += v;
    }
    for (double& v : h) {
        v /= sum;
    }
    return h;
}

} // namespace detail

/// Kaiser windowed-sinc design. High-pass and band-stop responses come from
/// spectral inversion of a low-pass / band-pass; band-pass is the difference
/// of two low-pass prototypes. Ideal cutoffs sit mid-transition so the stated
/// edges are met at full ripple spec.
inline FirFilter design_fir(const FilterSpec& spec, int sample_rate) {
    spec.validate(sample_rate);
    const double beta = detail::kaiser_beta(spec.stopband_atten_db);
    constexpr double two_pi = 6.283185307179586476925286766559;
    const double transition_rad =
        two_pi * spec.transition_width / static_cast<double>(sample_rate);
    const int taps =
        detail::kaiser_length(spec.stopband_atten_db, transition_rad);
    const int mid = (taps - 1) / 2;
    const double half_tw = spec.transition_width / 2.0;

    std::vector<double> h;
    switch (spec.kind) {
    case FilterKind::low_pass:
        h = detail::lowpass_prototype(spec.edge_lo + half_tw, taps, beta,
                                      sample_rate);
        break;
    case FilterKind::high_pass: {
        h = detail::lowpass_prototype(spec.edge_lo - half_tw, taps, beta,
                                      sample_rate);
        for (double& v : h) {
            v = -v;
        }
        h[static_cast<std::size_t>(mid)] += 1.0;
        break;
    }
    case FilterKind::band_pass:
    case FilterKind::band_stop: {
        const std::vector<double> upper = detail::lowpass_prototype(
            spec.edge_hi + half_tw, taps, beta, sample_rate);
        const std::vector<double> lower = detail::lowpass_prototype(
            spec.edge_lo - half_tw, taps, beta, sample_rate);
        h.resize(static_cast<std::size_t>(taps));
        for (int n = 0; n < taps; ++n) {
            h[static_cast<std::size_t>(n)] =
                upper[static_cast<std::size_t>(n)] -
                lower[static_cast<std::size_t>(n)];
        }
        if (spec.kind == FilterKind::band_stop) {
            for (double& v : h) {
                v = -v;
            }
            h[static_cast<std::size_t>(mid)] += 1.0;
        }
        break;
    }
    }

    FirFilter out;
    out.coefficients = std::move(h);
    out.sample_rate = sample_rate;
    out.spec = spec;
    out.id = spec.describe();
    return out;
}

/// Causal convolution with zero padding before the first sample; output
/// length equals input length.
inline AudioSignal apply_fir(const AudioSignal& signal,
                             const FirFilter& filter) {
    signal.validate("apply_fir");
    require(!filter.coefficients.empty(), "apply_fir: empty filter");
    require(filter.sample_rate == signal.sample_rate,
            "apply_fir: sample-rate mismatch (" +
                std::to_string(signal.sample_rate) + " vs filter at " +
                std::to_string(filter.sample_rate) + ")");
    const std::vector<double>& x = signal.samples;
    const std::vector<double>& h = filter.coefficients;
    const std::size_t n = x.size();
    const std::size_t k = h.size();
    AudioSignal out;
    out.sample_rate = signal.sample_rate;
    out.samples.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t kmax = std::min(k, i + 1);
        double acc = 0.0;
        for (std::size_t j = 0; j < kmax; ++j) {
            acc += h[j] * x[i - j];
        }
        out.samples[i] = acc;
    }
    return out;
}

/// Gain in dB sampled at n_points frequencies covering [0, Nyquist]; the
/// magnitude is floored at 1e-10 (-200 dB) so nulls stay finite.
inline std::vector<std::pair<double, double>>
frequency_response(const FirFilter& filter, int n_points) {
    require(n_points >= 2, "frequency_response: n_points must be >= 2");
    require(filter.sample_rate > 0 && !filter.coefficients.empty(),
            "frequency_response: invalid filter");
    const double nyquist = filter.sample_rate / 2.0;
    constexpr double two_pi = 6.283185307179586476925286766559;
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i) {
        const double freq = nyquist * static_cast<double>(i) /
                            static_cast<double>(n_points - 1);
        std::complex<double> acc{0.0, 0.0};
        const double w = -two_pi * freq / filter.sample_rate;
        for (std::size_t kk = 0; kk < filter.coefficients.size(); ++kk) {
            const double a = w * static_cast<double>(kk);
            acc += filter.coefficients[kk] *
                   std::complex<double>{std::cos(a), std::sin(a)};
        }
        double mag = std::abs(acc);
        if (mag < 1e-10) {
            mag = 1e-10;
        }
        out.emplace_back(freq, 20.0 * std::log10(mag));
    }
    return out;
}

/// Gain in dB at a single frequency.
inline double gain_at(const FirFilter& filter, double freq_hz) {
    constexpr double two_pi = 6.283185307179586476925286766559;
    std::complex<double> acc{0.0, 0.0};
    const double w = -two_pi * freq_hz / filter.sample_rate;
    for (std::size_t k = 0; k < filter.coefficients.size(); ++k) {
        const double a = w * static_cast<double>(k);
        acc += filter.coefficients[k] *
               std::complex<double>{std::cos(a), std::sin(a)};
    }
    double mag = std::abs(acc);
    if (mag < 1e-10) {
        mag = 1e-10;
    }
    return 20.0 * std::log10(mag);
}

} // namespace afp
