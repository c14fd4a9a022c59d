#ifndef TALIM_SPECTRUM_HPP
#define TALIM_SPECTRUM_HPP

#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "talim/error.hpp"
#include "talim/signal_io.hpp"

namespace talim {

inline constexpr double kDbFloor = -120.0;

inline double to_db(double linear) {
    if (linear <= 0.0) return kDbFloor;
    return std::max(kDbFloor, 20.0 * std::log10(linear));
}

enum class Window { rectangular, hann };

inline std::string to_string(Window w) { return w == Window::hann ? "hann" : "rectangular"; }

/// Periodic window of length n.
inline std::vector<double> make_window(Window kind, std::size_t n) {
    std::vector<double> w(n, 1.0);
    if (kind == Window::hann) {
        for (std::size_t i = 0; i < n; ++i)
            w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * double(i) / double(n));
    }
    return w;
}

/// In-place iterative radix-2 FFT. Size must be a power of two.
inline void fft(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / double(len);
        const std::complex<double> step(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                // Twiddles recomputed every 16 steps to bound drift.
                if ((k & 15U) == 0 && k != 0) w = std::polar(1.0, ang * double(k));
                const auto u = a[i + k];
                const auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= step;
            }
        }
    }
}

/// Amplitude-normalized one-sided magnitude spectrum (N/2+1 bins) of a
/// windowed frame: |X[m]| * 2 / sum(window). A sine of amplitude A centred
/// on bin m reports A there.
inline std::vector<double> magnitude_spectrum(std::span<const double> frame,
                                              Window window = Window::rectangular) {
    const std::size_t n = frame.size();
    if (n < 8 || !std::has_single_bit(n))
        throw Error(ErrorCode::BadFrameLength, "frame length " + std::to_string(n) +
                                                   " is not a power of two >= 8");
    const auto w = make_window(window, n);
    double wsum = 0.0;
    std::vector<std::complex<double>> buf(n);
    for (std::size_t i = 0; i < n; ++i) {
        buf[i] = frame[i] * w[i];
        wsum += w[i];
    }
    fft(buf);
    std::vector<double> mag(n / 2 + 1);
    const double scale = 2.0 / wsum;
    for (std::size_t m = 0; m < mag.size(); ++m) mag[m] = std::abs(buf[m]) * scale;
    return mag;
}

struct SpectrumConfig {
    std::size_t frame_size = 4096;
    std::size_t hop = 2048;
    Window window = Window::hann;

    void validate() const {
        if (frame_size < 8 || !std::has_single_bit(frame_size))
            throw Error(ErrorCode::BadFrameLength, "frame_size must be a power of two >= 8");
        if (hop == 0 || hop > frame_size)
            throw Error(ErrorCode::BadConfig, "hop must satisfy 0 < hop <= frame_size");
    }
};

/// Long-term average spectrum. `magnitudes` keeps the averaged linear values
/// without the dB floor so that ratio features stay exactly scale-invariant.
struct Ltas {
    std::vector<double> bin_freqs;
    std::vector<double> magnitudes;
    std::vector<double> magnitudes_db;
    std::size_t frame_count = 0;
    int sample_rate = 0;
    Window window = Window::hann;

    std::size_t size() const noexcept { return bin_freqs.size(); }
    double bin_width() const { return bin_freqs.size() > 1 ? bin_freqs[1] - bin_freqs[0] : 0.0; }
    double nyquist() const { return sample_rate / 2.0; }

    /// Level of bin m in dB without the display floor.
    double level_db(std::size_t m) const {
        const double v = magnitudes[m];
        return v > 0.0 ? 20.0 * std::log10(v) : -600.0;
    }

    /// Builds an LTAS directly from a dB curve, e.g. for fixtures.
    static Ltas from_db(std::vector<double> freqs, const std::vector<double>& db, int sample_rate,
                        Window window = Window::rectangular) {
        Ltas out;
        out.bin_freqs = std::move(freqs);
        out.sample_rate = sample_rate;
        out.window = window;
        out.frame_count = 1;
        for (double d : db) {
            out.magnitudes.push_back(std::pow(10.0, d / 20.0));
            out.magnitudes_db.push_back(std::max(kDbFloor, d));
        }
        return out;
    }
};

inline Ltas compute_ltas(const AudioClip& clip, const SpectrumConfig& cfg = {}) {
    cfg.validate();
    const auto x = clip.samples();
    if (x.size() < cfg.frame_size)
        throw Error(ErrorCode::ClipTooShort, "clip has " + std::to_string(x.size()) +
                                                 " samples, frame needs " + std::to_string(cfg.frame_size));
    Ltas out;
    out.sample_rate = clip.sample_rate();
    out.window = cfg.window;
    const std::size_t bins = cfg.frame_size / 2 + 1;
    out.magnitudes.assign(bins, 0.0);
    for (std::size_t start = 0; start + cfg.frame_size <= x.size(); start += cfg.hop) {
        const auto mag = magnitude_spectrum(x.subspan(start, cfg.frame_size), cfg.window);
        for (std::size_t m = 0; m < bins; ++m) out.magnitudes[m] += mag[m];
        ++out.frame_count;
    }
    out.bin_freqs.resize(bins);
    out.magnitudes_db.resize(bins);
    const double df = double(clip.sample_rate()) / double(cfg.frame_size);
    for (std::size_t m = 0; m < bins; ++m) {
        out.magnitudes[m] /= double(out.frame_count);
        out.magnitudes_db[m] = to_db(out.magnitudes[m]);
        out.bin_freqs[m] = double(m) * df;
    }
    return out;
}

/// `freq_hz,magnitude_db`, one row per bin.
inline void write_ltas_csv(const Ltas& ltas, std::ostream& out) {
    out << "freq_hz,magnitude_db\n";
    for (std::size_t m = 0; m < ltas.size(); ++m) out << ltas.bin_freqs[m] << ',' << ltas.magnitudes_db[m] << '\n';
}

struct Envelope {
    std::vector<double> times;
    std::vector<double> rms_values;
};

struct EnvelopeConfig {
    double window_ms = 10.0;
    double hop_ms = 1.0;
    // When the pitch is known, stretch the window to a whole number of
    // periods so the RMS carries no waveform ripple.
    bool pitch_synchronous = true;
};

/// Windowed RMS, each value stamped at its window start.
inline Envelope compute_envelope(const AudioClip& clip, double window_ms, double hop_ms) {
    if (!(hop_ms > 0.0) || window_ms < hop_ms)
        throw Error(ErrorCode::BadConfig, "envelope needs window_ms >= hop_ms > 0");
    const double sr = clip.sample_rate();
    const auto win = std::max<std::size_t>(1, std::size_t(std::lround(window_ms * 1e-3 * sr)));
    const auto hop = std::max<std::size_t>(1, std::size_t(std::lround(hop_ms * 1e-3 * sr)));
    const auto x = clip.samples();
    if (x.size() < win) throw Error(ErrorCode::ClipTooShort, "clip shorter than one envelope window");

    std::vector<double> prefix(x.size() + 1, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) prefix[i + 1] = prefix[i] + x[i] * x[i];

    Envelope env;
    for (std::size_t start = 0; start + win <= x.size(); start += hop) {
        const double energy = std::max(0.0, prefix[start + win] - prefix[start]);
        env.times.push_back(double(start) / sr);
        env.rms_values.push_back(std::sqrt(energy / double(win)));
    }
    return env;
}

inline Envelope compute_envelope(const AudioClip& clip, const EnvelopeConfig& cfg = {}) {
    return compute_envelope(clip, cfg.window_ms, cfg.hop_ms);
}

} // namespace talim

#endif
