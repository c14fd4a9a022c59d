#ifndef TALIM_HARMONICS_HPP
#define TALIM_HARMONICS_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "talim/error.hpp"
#include "talim/signal_io.hpp"
#include "talim/spectrum.hpp"

namespace talim {

struct Peak {
    double freq = 0.0;
    double magnitude_db = 0.0;
};

struct Partial {
    int k = 0;
    double freq = 0.0;
    double amp = 0.0;
};

struct HarmonicSeries {
    double f0 = 0.0;
    std::vector<Partial> partials;

    std::vector<double> amps() const {
        std::vector<double> out;
        out.reserve(partials.size());
        for (const auto& p : partials) out.push_back(p.amp);
        return out;
    }
};

struct PitchConfig {
    double fmin = 80.0;
    double fmax = 1000.0;
};

struct PeakConfig {
    double min_separation = 50.0;
    double threshold_db = 40.0;
};

namespace detail {

struct Refined {
    double bin = 0.0; // fractional bin index
    double amp = 0.0; // linear
};

/// Sub-bin refinement of a local maximum at bin m. Hann spectra use the
/// two-bin magnitude ratio, which is exact for an isolated sinusoid under a
/// periodic Hann window; other windows use the three-point parabola on dB.
inline Refined refine_bin(const Ltas& ltas, std::size_t m) {
    const auto& mag = ltas.magnitudes;
    if (m == 0 || m + 1 >= mag.size() || mag[m] <= 0.0) return {double(m), mag[m]};

    if (ltas.window == Window::hann) {
        const bool right = mag[m + 1] >= mag[m - 1];
        const double ratio = (right ? mag[m + 1] : mag[m - 1]) / mag[m];
        const double delta = std::clamp((2.0 * ratio - 1.0) / (ratio + 1.0), 0.0, 0.5);
        const double sinc = delta == 0.0 ? 1.0
                                         : std::sin(std::numbers::pi * delta) / (std::numbers::pi * delta);
        return {double(m) + (right ? delta : -delta), mag[m] * (1.0 - delta * delta) / sinc};
    }

    const double a = ltas.level_db(m - 1), b = ltas.level_db(m), c = ltas.level_db(m + 1);
    const double denom = a - 2.0 * b + c;
    const double p = denom < 0.0 ? std::clamp(0.5 * (a - c) / denom, -0.5, 0.5) : 0.0;
    const double vertex_db = b - 0.25 * (a - c) * p;
    return {double(m) + p, std::pow(10.0, vertex_db / 20.0)};
}

inline double amp_to_db(double amp) { return amp > 0.0 ? 20.0 * std::log10(amp) : -600.0; }

} // namespace detail

/// Fundamental frequency from the normalized autocorrelation of the loudest
/// 0.5 s of the clip. Among lag peaks in [1/fmax, 1/fmin] the shortest one
/// within a small tolerance of the best is chosen, which keeps period
/// multiples (sub-octaves) from winning on rounding noise.
inline double estimate_f0(const AudioClip& clip, double fmin = 80.0, double fmax = 1000.0) {
    if (!(fmin > 0.0) || !(fmin < fmax)) throw Error(ErrorCode::BadConfig, "pitch range needs 0 < fmin < fmax");
    const double sr = clip.sample_rate();
    if (clip.duration() <= 2.0 / fmin)
        throw Error(ErrorCode::ClipTooShort, "clip must be longer than two periods of fmin");

    const auto all = clip.samples();
    const std::size_t seg_len = std::min(all.size(), std::size_t(std::lround(0.5 * sr)));

    std::vector<double> energy(all.size() + 1, 0.0);
    for (std::size_t i = 0; i < all.size(); ++i) energy[i + 1] = energy[i] + all[i] * all[i];
    std::size_t best_start = 0;
    double best_energy = -1.0;
    for (std::size_t s = 0; s + seg_len <= all.size(); ++s) {
        const double e = energy[s + seg_len] - energy[s];
        if (e > best_energy) {
            best_energy = e;
            best_start = s;
        }
    }
    const auto x = all.subspan(best_start, seg_len);

    const auto lag_min = std::max<std::size_t>(2, std::size_t(std::floor(sr / fmax)));
    const auto lag_max = std::min<std::size_t>(seg_len - 2, std::size_t(std::ceil(sr / fmin)));
    if (lag_min >= lag_max) throw Error(ErrorCode::ClipTooShort, "segment too short for the pitch range");

    std::vector<double> prefix(seg_len + 1, 0.0);
    for (std::size_t i = 0; i < seg_len; ++i) prefix[i + 1] = prefix[i] + x[i] * x[i];

    // r[i] holds the lag lag_min - 1 + i.
    std::vector<double> r(lag_max - lag_min + 3, 0.0);
    for (std::size_t i = 0; i < r.size(); ++i) {
        const std::size_t lag = lag_min - 1 + i;
        const std::size_t n = seg_len - lag;
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += x[j] * x[j + lag];
        const double e0 = prefix[n];
        const double e1 = prefix[seg_len] - prefix[lag];
        r[i] = (e0 > 0.0 && e1 > 0.0) ? acc / std::sqrt(e0 * e1) : 0.0;
    }

    struct Candidate {
        double lag;
        double value;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 1; i + 1 < r.size(); ++i) {
        if (r[i] >= r[i - 1] && r[i] > r[i + 1]) {
            const double a = r[i - 1], b = r[i], c = r[i + 1];
            const double denom = a - 2.0 * b + c;
            const double p = denom < 0.0 ? std::clamp(0.5 * (a - c) / denom, -0.5, 0.5) : 0.0;
            candidates.push_back({double(lag_min - 1 + i) + p, b - 0.25 * (a - c) * p});
        }
    }
    double best = 0.0;
    for (const auto& c : candidates) best = std::max(best, c.value);
    if (candidates.empty() || best < 0.3) throw Error(ErrorCode::NoPitch, "no periodicity above 0.3");

    constexpr double kOctaveTolerance = 0.02;
    for (const auto& c : candidates) {
        if (c.value >= best - kOctaveTolerance) return sr / c.lag;
    }
    return sr / candidates.front().lag; // unreachable
}

inline double estimate_f0(const AudioClip& clip, const PitchConfig& cfg) {
    return estimate_f0(clip, cfg.fmin, cfg.fmax);
}

/// Interior local maxima within `threshold_db` of the spectrum maximum,
/// strongest first, thinned so that no two are closer than `min_separation`.
inline std::vector<Peak> detect_peaks(const Ltas& ltas, double min_separation = 50.0, double threshold_db = 40.0) {
    if (ltas.size() < 3) throw Error(ErrorCode::NoPeaks, "spectrum has fewer than three bins");
    double top = -1e300;
    for (std::size_t m = 0; m < ltas.size(); ++m) top = std::max(top, ltas.level_db(m));

    std::vector<Peak> found;
    const double df = ltas.bin_width();
    for (std::size_t m = 1; m + 1 < ltas.size(); ++m) {
        const double level = ltas.level_db(m);
        if (!(level > ltas.level_db(m - 1) && level > ltas.level_db(m + 1))) continue;
        if (!(level > top - threshold_db)) continue;
        const auto refined = detail::refine_bin(ltas, m);
        found.push_back({ltas.bin_freqs[0] + refined.bin * df, detail::amp_to_db(refined.amp)});
    }
    std::stable_sort(found.begin(), found.end(),
                     [](const Peak& a, const Peak& b) { return a.magnitude_db > b.magnitude_db; });

    std::vector<Peak> kept;
    for (const auto& p : found) {
        const bool clear = std::all_of(kept.begin(), kept.end(), [&](const Peak& q) {
            return std::abs(q.freq - p.freq) >= min_separation;
        });
        if (clear) kept.push_back(p);
    }
    if (kept.empty()) throw Error(ErrorCode::NoPeaks, "no local maximum above the threshold");
    return kept;
}

inline std::vector<Peak> detect_peaks(const Ltas& ltas, const PeakConfig& cfg) {
    return detect_peaks(ltas, cfg.min_separation, cfg.threshold_db);
}

/// Partial k is the refined maximum of the LTAS within k*f0 +- f0/4. Weak
/// partials keep their measured amplitude so indices stay 1..K.
inline HarmonicSeries extract_partials(const Ltas& ltas, double f0, int max_partials = 10) {
    if (max_partials < 2) throw Error(ErrorCode::BadConfig, "max_partials must be at least 2");
    const double nyquist = ltas.nyquist();
    if (!(f0 > 0.0) || !(2.0 * f0 < nyquist))
        throw Error(ErrorCode::F0OutOfRange, "f0 " + std::to_string(f0) + " Hz outside (0, nyquist/2)");
    const int count = std::min(max_partials, int(std::floor(nyquist / f0)) - 1);
    if (count < 2) throw Error(ErrorCode::F0OutOfRange, "fewer than two partials fit below nyquist");

    const double df = ltas.bin_width();
    const auto last = ltas.size() - 1;
    HarmonicSeries series{f0, {}};
    for (int k = 1; k <= count; ++k) {
        const double centre = k * f0;
        const double lo = centre - f0 / 4.0, hi = centre + f0 / 4.0;
        auto first = std::size_t(std::max(0.0, std::ceil(lo / df)));
        auto end = std::min(last, std::size_t(std::floor(hi / df)));
        if (first > end) first = end = std::min(last, std::size_t(std::lround(centre / df)));

        std::size_t best = first;
        for (std::size_t m = first; m <= end; ++m) {
            if (ltas.magnitudes[m] > ltas.magnitudes[best]) best = m;
        }
        double freq = ltas.bin_freqs[best];
        double amp = ltas.magnitudes[best];
        const bool interior = best > 0 && best < last;
        if (interior && ltas.magnitudes[best] >= ltas.magnitudes[best - 1] &&
            ltas.magnitudes[best] >= ltas.magnitudes[best + 1]) {
            const auto refined = detail::refine_bin(ltas, best);
            freq = std::clamp(refined.bin * df, centre - f0 / 2.0, centre + f0 / 2.0);
            amp = refined.amp;
        }
        series.partials.push_back({k, freq, amp});
    }
    return series;
}

} // namespace talim

#endif
