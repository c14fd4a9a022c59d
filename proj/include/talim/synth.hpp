#ifndef TALIM_SYNTH_HPP
#define TALIM_SYNTH_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "talim/error.hpp"
#include "talim/signal_io.hpp"

namespace talim {

/// Additive stroke model. Empty `stretch` means exact harmonics and empty
/// `decay` means every partial decays with time constant `duration`.
struct SynthSpec {
    double f0 = 259.0;
    std::vector<double> partial_amps{1.0};
    std::vector<double> stretch;
    double attack = 0.012;
    std::vector<double> decay;
    double duration = 0.5;
    int sample_rate = 44100;

    double stretch_of(std::size_t i) const { return stretch.empty() ? 1.0 : stretch[i]; }
    double decay_of(std::size_t i) const { return decay.empty() ? duration : decay[i]; }
    double partial_freq(std::size_t i) const { return double(i + 1) * f0 * stretch_of(i); }

    void validate() const {
        auto fail = [](const std::string& why) { throw Error(ErrorCode::SpecInvalid, why); };
        if (!(f0 > 0.0)) fail("f0 must be positive");
        if (sample_rate <= 0) fail("sample_rate must be positive");
        if (partial_amps.empty()) fail("at least one partial amplitude is required");
        if (!stretch.empty() && stretch.size() != partial_amps.size()) fail("stretch list length mismatch");
        if (!decay.empty() && decay.size() != partial_amps.size()) fail("decay list length mismatch");
        if (!(duration > 0.0) || !(attack >= 0.0) || !(duration > attack)) fail("need duration > attack >= 0");
        bool audible = false;
        for (std::size_t i = 0; i < partial_amps.size(); ++i) {
            if (!(partial_amps[i] >= 0.0)) fail("partial amplitudes must be non-negative");
            audible = audible || partial_amps[i] > 0.0;
            if (!(stretch_of(i) > 0.0)) fail("stretch factors must be positive");
            if (!(decay_of(i) > 0.0)) fail("decay constants must be positive");
            if (!(partial_freq(i) < sample_rate / 2.0)) fail("partial " + std::to_string(i + 1) + " above nyquist");
        }
        if (!audible) fail("all partial amplitudes are zero");
    }
};

/// Five equal harmonics over a 259 Hz fundamental.
inline SynthSpec raman_preset() {
    SynthSpec spec;
    spec.f0 = 259.0;
    spec.partial_amps = {1.0, 1.0, 1.0, 1.0, 1.0};
    return spec;
}

/// Linear attack ramp times the sum of decaying partials, peak-normalized to 0.9.
inline AudioClip synth_stroke(const SynthSpec& spec) {
    spec.validate();
    const auto n = std::size_t(std::lround(spec.duration * spec.sample_rate));
    std::vector<double> out(n, 0.0);
    const double dt = 1.0 / spec.sample_rate;
    for (std::size_t i = 0; i < spec.partial_amps.size(); ++i) {
        const double a = spec.partial_amps[i];
        if (a == 0.0) continue;
        const double w = 2.0 * std::numbers::pi * spec.partial_freq(i);
        const double tau = spec.decay_of(i);
        for (std::size_t j = 0; j < n; ++j) {
            const double t = double(j) * dt;
            out[j] += a * std::exp(-t / tau) * std::sin(w * t);
        }
    }
    double peak = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double t = double(j) * dt;
        if (spec.attack > 0.0 && t < spec.attack) out[j] *= t / spec.attack;
        peak = std::max(peak, std::abs(out[j]));
    }
    if (peak > 0.0) {
        for (double& s : out) s *= 0.9 / peak;
    }
    return AudioClip(std::move(out), spec.sample_rate, "synth");
}

} // namespace talim

#endif
