#ifndef TALIM_TIMBRE_HPP
#define TALIM_TIMBRE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "talim/error.hpp"
#include "talim/harmonics.hpp"
#include "talim/signal_io.hpp"
#include "talim/spectrum.hpp"

namespace talim {

/// The fourteen stroke descriptors, in the canonical report order.
struct TimbreVector {
    double brightness = 0.0;     // Bark
    double tristimulus1 = 0.0;
    double tristimulus2 = 0.0;
    double tristimulus3 = 0.0;
    double odd_param = 0.0;
    double even_param = 0.0;
    double irregularity = 0.0;
    double inharmonicity = 0.0;  // signed percent
    double centroid = 0.0;       // ERB-rate
    double pitch = 0.0;          // Hz
    double attack_time = 0.0;    // s
    double rms_power = 0.0;      // dBFS
    double peak_freq_diff = 0.0; // Hz
    double peak_amp_diff = 0.0;  // dB

    static constexpr std::size_t kSize = 14;

    static constexpr std::array<std::string_view, kSize> field_names() {
        return {"brightness",   "tristimulus1",  "tristimulus2", "tristimulus3", "odd_param",
                "even_param",   "irregularity",  "inharmonicity", "centroid",    "pitch",
                "attack_time",  "rms_power",     "peak_freq_diff", "peak_amp_diff"};
    }

    std::array<double, kSize> values() const {
        return {brightness, tristimulus1, tristimulus2, tristimulus3, odd_param, even_param, irregularity,
                inharmonicity, centroid, pitch, attack_time, rms_power, peak_freq_diff, peak_amp_diff};
    }

    bool operator==(const TimbreVector&) const = default;
};

struct Tristimulus {
    double t1 = 0.0, t2 = 0.0, t3 = 0.0;
};

struct OddEven {
    double odd = 0.0, even = 0.0;
};

namespace detail {

inline double amp_sum(std::span<const double> amps) {
    double s = 0.0;
    for (double a : amps) s += a;
    if (!(s > 0.0)) throw Error(ErrorCode::ZeroSpectrum, "partial amplitudes sum to zero");
    return s;
}

inline void require_partials(std::span<const double> amps, std::size_t n) {
    if (amps.size() < n)
        throw Error(ErrorCode::BadConfig, "need at least " + std::to_string(n) + " partials");
}

} // namespace detail

// Harmonic features take amplitudes a_1..a_K (index 0 holds the fundamental).

inline Tristimulus tristimulus(std::span<const double> amps) {
    detail::require_partials(amps, 1);
    const double total = detail::amp_sum(amps);
    double mid = 0.0, high = 0.0;
    for (std::size_t i = 1; i < amps.size(); ++i) (i <= 3 ? mid : high) += amps[i];
    return {amps[0] / total, mid / total, high / total};
}

/// The odd share excludes the fundamental, so t1 + odd + even = 1.
inline OddEven odd_even(std::span<const double> amps) {
    detail::require_partials(amps, 2);
    const double total = detail::amp_sum(amps);
    double odd = 0.0, even = 0.0;
    for (std::size_t i = 1; i < amps.size(); ++i) ((i + 1) % 2 == 0 ? even : odd) += amps[i];
    return {odd / total, even / total};
}

/// Sum of squared adjacent differences over the energy; 0 for a flat envelope.
inline double irregularity(std::span<const double> amps) {
    detail::require_partials(amps, 2);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        den += amps[i] * amps[i];
        if (i + 1 < amps.size()) num += (amps[i] - amps[i + 1]) * (amps[i] - amps[i + 1]);
    }
    if (!(den > 0.0)) throw Error(ErrorCode::ZeroSpectrum, "partial amplitudes are all zero");
    return num / den;
}

inline Tristimulus tristimulus(const HarmonicSeries& s) { return tristimulus(s.amps()); }
inline OddEven odd_even(const HarmonicSeries& s) { return odd_even(s.amps()); }
inline double irregularity(const HarmonicSeries& s) { return irregularity(s.amps()); }

/// Amplitude-weighted signed deviation of f_k from k*f0, in percent.
inline double inharmonicity(const HarmonicSeries& s) {
    if (s.partials.size() < 2) throw Error(ErrorCode::BadConfig, "need at least 2 partials");
    if (!(s.f0 > 0.0)) throw Error(ErrorCode::F0OutOfRange, "f0 must be positive");
    double num = 0.0, den = 0.0;
    for (const auto& p : s.partials) {
        const double ideal = p.k * s.f0;
        num += p.amp * (p.freq - ideal) / ideal;
        den += p.amp;
    }
    if (!(den > 0.0)) throw Error(ErrorCode::ZeroSpectrum, "partial amplitudes sum to zero");
    return 100.0 * num / den;
}

inline double bark(double f) { return 13.0 * std::atan(0.00076 * f) + 3.5 * std::atan((f / 7500.0) * (f / 7500.0)); }

inline double erb_rate(double f) { return 21.4 * std::log10(1.0 + 0.00437 * f); }

namespace detail {

inline double weighted_scale_mean(const Ltas& ltas, double (*scale)(double)) {
    double num = 0.0, den = 0.0;
    for (std::size_t m = 0; m < ltas.size(); ++m) {
        num += scale(ltas.bin_freqs[m]) * ltas.magnitudes[m];
        den += ltas.magnitudes[m];
    }
    if (!(den > 0.0)) throw Error(ErrorCode::ZeroSpectrum, "spectrum is silent");
    return num / den;
}

} // namespace detail

/// Magnitude-weighted mean on the Bark scale.
inline double brightness(const Ltas& ltas) { return detail::weighted_scale_mean(ltas, &bark); }

/// Magnitude-weighted mean on the ERB-rate scale.
inline double centroid(const Ltas& ltas) { return detail::weighted_scale_mean(ltas, &erb_rate); }

/// Time from the first 10%-of-peak crossing to the envelope peak.
inline double attack_time(const Envelope& env) {
    if (env.rms_values.empty()) throw Error(ErrorCode::SilentClip, "empty envelope");
    const auto peak_it = std::max_element(env.rms_values.begin(), env.rms_values.end());
    if (!(*peak_it > 0.0)) throw Error(ErrorCode::SilentClip, "envelope never rises above zero");
    const auto peak = std::size_t(peak_it - env.rms_values.begin());
    const double threshold = 0.1 * *peak_it;
    std::size_t onset = 0;
    while (env.rms_values[onset] < threshold) ++onset;
    return std::max(0.0, env.times[peak] - env.times[onset]);
}

inline double rms_power_db(const AudioClip& clip) {
    double acc = 0.0;
    for (double s : clip.samples()) acc += s * s;
    return to_db(std::sqrt(acc / double(clip.size())));
}

struct PeakDiffs {
    double freq_diff = 0.0;
    double amp_diff = 0.0;
};

inline PeakDiffs peak_diffs(std::span<const Peak> peaks) {
    if (peaks.size() < 2) throw Error(ErrorCode::FewerThanTwoPeaks, "need two spectral peaks");
    std::vector<Peak> sorted(peaks.begin(), peaks.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const Peak& a, const Peak& b) { return a.magnitude_db > b.magnitude_db; });
    return {std::abs(sorted[0].freq - sorted[1].freq), std::abs(sorted[0].magnitude_db - sorted[1].magnitude_db)};
}

struct AnalysisConfig {
    SpectrumConfig spectrum;
    PitchConfig pitch;
    PeakConfig peaks;
    EnvelopeConfig envelope;
    int max_partials = 10;
};

namespace detail {

template <class F>
auto tagged(const char* feature, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.code(), std::string(feature) + ": " + e.message(), feature);
    }
}

} // namespace detail

/// Full descriptor pipeline: LTAS, pitch, partials, peaks, envelope.
/// When fewer than two peaks clear the configured threshold (a pure tone),
/// peak detection is repeated over the full dynamic range.
inline TimbreVector compute_all(const AudioClip& clip, const AnalysisConfig& cfg = {}) {
    const double power = rms_power_db(clip);
    if (std::all_of(clip.samples().begin(), clip.samples().end(), [](double s) { return s == 0.0; }))
        throw Error(ErrorCode::SilentClip, "clip is silent", "rms_power");

    TimbreVector v;
    v.rms_power = power;
    const Ltas ltas = detail::tagged("spectrum", [&] { return compute_ltas(clip, cfg.spectrum); });
    v.pitch = detail::tagged("pitch", [&] { return estimate_f0(clip, cfg.pitch); });
    const HarmonicSeries series =
        detail::tagged("tristimulus1", [&] { return extract_partials(ltas, v.pitch, cfg.max_partials); });
    const auto amps = series.amps();

    const auto tri = detail::tagged("tristimulus1", [&] { return tristimulus(amps); });
    v.tristimulus1 = tri.t1;
    v.tristimulus2 = tri.t2;
    v.tristimulus3 = tri.t3;
    const auto oe = detail::tagged("odd_param", [&] { return odd_even(amps); });
    v.odd_param = oe.odd;
    v.even_param = oe.even;
    v.irregularity = detail::tagged("irregularity", [&] { return irregularity(amps); });
    v.inharmonicity = detail::tagged("inharmonicity", [&] { return inharmonicity(series); });
    v.brightness = detail::tagged("brightness", [&] { return brightness(ltas); });
    v.centroid = detail::tagged("centroid", [&] { return centroid(ltas); });

    const auto diffs = detail::tagged("peak_freq_diff", [&] {
        auto peaks = detect_peaks(ltas, cfg.peaks);
        if (peaks.size() < 2) peaks = detect_peaks(ltas, cfg.peaks.min_separation, 1e9);
        return peak_diffs(peaks);
    });
    v.peak_freq_diff = diffs.freq_diff;
    v.peak_amp_diff = diffs.amp_diff;

    v.attack_time = detail::tagged("attack_time", [&] {
        double window_ms = cfg.envelope.window_ms;
        if (cfg.envelope.pitch_synchronous) {
            const double period_ms = 1000.0 / v.pitch;
            window_ms = std::max(1.0, std::ceil(window_ms / period_ms - 1e-9)) * period_ms;
        }
        return attack_time(compute_envelope(clip, window_ms, std::min(cfg.envelope.hop_ms, window_ms)));
    });
    return v;
}

} // namespace talim

#endif
