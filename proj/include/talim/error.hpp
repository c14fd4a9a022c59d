#ifndef TALIM_ERROR_HPP
#define TALIM_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace talim {

enum class ErrorCode {
    // signal_io
    NotWav,
    UnsupportedEncoding,
    MultiChannel,
    TruncatedData,
    IoFailure,
    InvalidClip,
    // spectrum
    BadFrameLength,
    BadConfig,
    ClipTooShort,
    // harmonics
    NoPitch,
    NoPeaks,
    F0OutOfRange,
    // timbre
    ZeroSpectrum,
    SilentClip,
    FewerThanTwoPeaks,
    // stats
    InvalidMatrix,
    ZeroVariance,
    DegenerateLoadings,
    // synth
    SpecInvalid,
    // cli
    EmptyManifest,
    BadManifest,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::NotWav: return "NotWav";
    case ErrorCode::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::MultiChannel: return "MultiChannel";
    case ErrorCode::TruncatedData: return "TruncatedData";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::InvalidClip: return "InvalidClip";
    case ErrorCode::BadFrameLength: return "BadFrameLength";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::ClipTooShort: return "ClipTooShort";
    case ErrorCode::NoPitch: return "NoPitch";
    case ErrorCode::NoPeaks: return "NoPeaks";
    case ErrorCode::F0OutOfRange: return "F0OutOfRange";
    case ErrorCode::ZeroSpectrum: return "ZeroSpectrum";
    case ErrorCode::SilentClip: return "SilentClip";
    case ErrorCode::FewerThanTwoPeaks: return "FewerThanTwoPeaks";
    case ErrorCode::InvalidMatrix: return "InvalidMatrix";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::DegenerateLoadings: return "DegenerateLoadings";
    case ErrorCode::SpecInvalid: return "SpecInvalid";
    case ErrorCode::EmptyManifest: return "EmptyManifest";
    case ErrorCode::BadManifest: return "BadManifest";
    }
    return "Unknown";
}

/// Exception carrying a machine-readable code. `feature` names the timbre
/// descriptor being computed when the failure happened (empty otherwise).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what, std::string feature = {})
        : std::runtime_error(std::string(to_string(code)) + ": " + what),
          code_(code), message_(what), feature_(std::move(feature)) {}

    ErrorCode code() const noexcept { return code_; }
    /// Message without the code prefix.
    const std::string& message() const noexcept { return message_; }
    const std::string& feature() const noexcept { return feature_; }

private:
    ErrorCode code_;
    std::string message_;
    std::string feature_;
};

} // namespace talim

#endif
