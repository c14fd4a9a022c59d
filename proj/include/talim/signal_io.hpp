#ifndef TALIM_SIGNAL_IO_HPP
#define TALIM_SIGNAL_IO_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "talim/error.hpp"

namespace talim {

/// Mono sample buffer in [-1, 1] with its sample rate. Construction
/// validates the invariants, so every live AudioClip is analyzable.
class AudioClip {
public:
    AudioClip(std::vector<double> samples, int sample_rate, std::string source_id = {})
        : samples_(std::move(samples)), sample_rate_(sample_rate), source_id_(std::move(source_id)) {
        if (sample_rate_ <= 0)
            throw Error(ErrorCode::InvalidClip, "sample rate must be positive");
        if (samples_.empty())
            throw Error(ErrorCode::InvalidClip, "clip has no samples");
        for (double s : samples_) {
            if (!(s >= -1.0 && s <= 1.0))
                throw Error(ErrorCode::InvalidClip, "sample outside [-1, 1]");
        }
    }

    std::span<const double> samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }
    int sample_rate() const noexcept { return sample_rate_; }
    const std::string& source_id() const noexcept { return source_id_; }
    double duration() const noexcept { return static_cast<double>(samples_.size()) / sample_rate_; }

    /// Copy with every sample multiplied by `gain`; |gain| must keep samples in range.
    AudioClip scaled(double gain) const {
        std::vector<double> out(samples_);
        for (double& s : out) s *= gain;
        return AudioClip(std::move(out), sample_rate_, source_id_);
    }

private:
    std::vector<double> samples_;
    int sample_rate_;
    std::string source_id_;
};

namespace detail {

inline std::uint32_t read_u32(const std::uint8_t* p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
           (std::uint32_t(p[3]) << 24);
}

inline std::uint16_t read_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
    out.insert(out.end(), tag, tag + 4);
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

} // namespace detail

/// Decodes an in-memory RIFF/WAVE image. PCM 8/16/24/32-bit and IEEE float
/// 32/64-bit are accepted; integer PCM is scaled by 2^(bits-1), float is
/// clamped to [-1, 1].
inline AudioClip decode_wav(std::span<const std::uint8_t> bytes, std::string source_id = {}) {
    using namespace detail;
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw Error(ErrorCode::NotWav, "missing RIFF/WAVE magic");

    bool have_fmt = false;
    std::uint16_t format = 0, channels = 0, block_align = 0, bits = 0;
    std::uint32_t rate = 0;
    const std::uint8_t* data = nullptr;
    std::size_t data_len = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::uint8_t* chunk = bytes.data() + pos;
        const std::size_t len = read_u32(chunk + 4);
        const std::size_t body = pos + 8;
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (len < 16 || body + len > bytes.size())
                throw Error(ErrorCode::TruncatedData, "fmt chunk truncated");
            const std::uint8_t* f = bytes.data() + body;
            format = read_u16(f);
            channels = read_u16(f + 2);
            rate = read_u32(f + 4);
            block_align = read_u16(f + 12);
            bits = read_u16(f + 14);
            if (format == kFormatExtensible) {
                if (len < 26)
                    throw Error(ErrorCode::TruncatedData, "extensible fmt chunk truncated");
                format = read_u16(f + 24); // first two bytes of the subformat GUID
            }
            have_fmt = true;
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            if (!have_fmt) throw Error(ErrorCode::NotWav, "data chunk precedes fmt chunk");
            if (body + len > bytes.size())
                throw Error(ErrorCode::TruncatedData, "data chunk declares " + std::to_string(len) +
                                                          " bytes, file holds " +
                                                          std::to_string(bytes.size() - body));
            data = bytes.data() + body;
            data_len = len;
            break;
        }
        pos = body + len + (len & 1U);
    }

    if (!have_fmt) throw Error(ErrorCode::NotWav, "no fmt chunk");
    if (format != kFormatPcm && format != kFormatFloat)
        throw Error(ErrorCode::UnsupportedEncoding, "format tag " + std::to_string(format));
    if (channels > 1) throw Error(ErrorCode::MultiChannel, std::to_string(channels) + " channels");
    if (channels == 0 || rate == 0) throw Error(ErrorCode::NotWav, "malformed fmt chunk");
    const bool pcm_ok = format == kFormatPcm && (bits == 8 || bits == 16 || bits == 24 || bits == 32);
    const bool float_ok = format == kFormatFloat && (bits == 32 || bits == 64);
    if (!pcm_ok && !float_ok)
        throw Error(ErrorCode::UnsupportedEncoding, std::to_string(bits) + "-bit samples");
    if (block_align != bits / 8) throw Error(ErrorCode::NotWav, "block align disagrees with bit depth");
    if (data == nullptr) throw Error(ErrorCode::TruncatedData, "no data chunk");
    if (data_len % block_align != 0)
        throw Error(ErrorCode::TruncatedData, "data length is not a multiple of block align");

    const std::size_t count = data_len / block_align;
    std::vector<double> samples(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint8_t* p = data + i * block_align;
        double s = 0.0;
        if (format == kFormatPcm) {
            switch (bits) {
            case 8: s = (static_cast<int>(p[0]) - 128) / 128.0; break;
            case 16: s = static_cast<std::int16_t>(read_u16(p)) / 32768.0; break;
            case 24: {
                std::int32_t v = std::int32_t(p[0]) | (std::int32_t(p[1]) << 8) | (std::int32_t(p[2]) << 16);
                if (v & 0x800000) v -= 0x1000000;
                s = v / 8388608.0;
                break;
            }
            default: s = static_cast<std::int32_t>(read_u32(p)) / 2147483648.0; break;
            }
        } else if (bits == 32) {
            float f;
            std::uint32_t raw = read_u32(p);
            std::memcpy(&f, &raw, sizeof f);
            s = f;
        } else {
            double d;
            std::uint64_t raw = std::uint64_t(read_u32(p)) | (std::uint64_t(read_u32(p + 4)) << 32);
            std::memcpy(&d, &raw, sizeof d);
            s = d;
        }
        if (std::isnan(s)) s = 0.0;
        samples[i] = std::clamp(s, -1.0, 1.0);
    }
    if (samples.empty()) throw Error(ErrorCode::TruncatedData, "data chunk is empty");
    return AudioClip(std::move(samples), static_cast<int>(rate), std::move(source_id));
}

inline AudioClip load_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_wav(bytes, path.stem().string());
}

/// 16-bit PCM mono encoding; samples are rounded to the nearest LSB.
inline std::vector<std::uint8_t> encode_wav(const AudioClip& clip) {
    using namespace detail;
    const auto n = static_cast<std::uint32_t>(clip.size());
    std::vector<std::uint8_t> out;
    out.reserve(44 + 2 * std::size_t(n));
    put_tag(out, "RIFF");
    put_u32(out, 36 + 2 * n);
    put_tag(out, "WAVE");
    put_tag(out, "fmt ");
    put_u32(out, 16);
    put_u16(out, kFormatPcm);
    put_u16(out, 1);
    put_u32(out, static_cast<std::uint32_t>(clip.sample_rate()));
    put_u32(out, static_cast<std::uint32_t>(clip.sample_rate()) * 2);
    put_u16(out, 2);
    put_u16(out, 16);
    put_tag(out, "data");
    put_u32(out, 2 * n);
    for (double s : clip.samples()) {
        const long q = std::clamp(std::lround(s * 32768.0), -32768L, 32767L);
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }
    return out;
}

inline void write_wav(const AudioClip& clip, const std::filesystem::path& path) {
    const auto bytes = encode_wav(clip);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

} // namespace talim

#endif
