#pragma once

#include "umodem/error.hpp"
#include "umodem/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace umodem {

// 16-bit little-endian PCM only.
struct WavSpec {
    int sample_rate_hz = 0;
    int channel_count = 1;
    int bits_per_sample = 16;
};

struct WavWriteReport {
    std::size_t clipped_samples = 0;
};

namespace detail {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

inline void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

inline std::uint16_t get_u16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

inline std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

} // namespace detail

// round(x * 32767) clamped to the int16 range; |x| > 1 is clipped to +/-1 first.
inline std::int16_t to_pcm16(double x, std::size_t& clipped) {
    if (x > 1.0 || x < -1.0) {
        ++clipped;
        x = std::clamp(x, -1.0, 1.0);
    }
    const double v = std::round(x * 32767.0);
    return static_cast<std::int16_t>(std::clamp(v, -32768.0, 32767.0));
}

inline std::vector<std::uint8_t> encode_wav(const AudioSignal& signal, WavWriteReport* report = nullptr) {
    const auto channels = static_cast<std::uint16_t>(signal.channel_count());
    const std::uint32_t data_bytes = static_cast<std::uint32_t>(signal.size() * channels * 2);
    const auto rate = static_cast<std::uint32_t>(signal.sample_rate());

    std::vector<std::uint8_t> out;
    out.reserve(44 + data_bytes);
    detail::put_tag(out, "RIFF");
    detail::put_u32(out, 36 + data_bytes);
    detail::put_tag(out, "WAVE");
    detail::put_tag(out, "fmt ");
    detail::put_u32(out, 16);
    detail::put_u16(out, 1); // PCM
    detail::put_u16(out, channels);
    detail::put_u32(out, rate);
    detail::put_u32(out, rate * channels * 2);
    detail::put_u16(out, static_cast<std::uint16_t>(channels * 2));
    detail::put_u16(out, 16);
    detail::put_tag(out, "data");
    detail::put_u32(out, data_bytes);

    std::size_t clipped = 0;
    for (std::size_t k = 0; k < signal.size(); ++k)
        for (int c = 0; c < channels; ++c)
            detail::put_u16(out, static_cast<std::uint16_t>(to_pcm16(signal.channel(c)[k], clipped)));
    if (report) report->clipped_samples = clipped;
    return out;
}

inline WavWriteReport write_wav(const AudioSignal& signal, const std::filesystem::path& path) {
    WavWriteReport report;
    const auto bytes = encode_wav(signal, &report);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ModemError(Errc::io, "cannot open " + path.string() + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw ModemError(Errc::io, "write failed for " + path.string());
    return report;
}

struct DecodedWav {
    AudioSignal signal;
    WavSpec spec;
};

inline DecodedWav decode_wav(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw ModemError(Errc::corrupt_file, "missing RIFF/WAVE header");

    WavSpec spec;
    bool have_fmt = false;
    const std::uint8_t* data = nullptr;
    std::size_t data_size = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::uint8_t* chunk = bytes.data() + pos;
        const std::size_t size = detail::get_u32(chunk + 4);
        const std::size_t body = pos + 8;
        if (size > bytes.size() - body) throw ModemError(Errc::corrupt_file, "chunk extends past end of file");

        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (size < 16) throw ModemError(Errc::corrupt_file, "fmt chunk too short");
            const std::uint16_t tag = detail::get_u16(chunk + 8);
            if (tag != 1) throw ModemError(Errc::unsupported_format, "format tag " + std::to_string(tag) + " is not PCM");
            spec.channel_count = detail::get_u16(chunk + 10);
            spec.sample_rate_hz = static_cast<int>(detail::get_u32(chunk + 12));
            spec.bits_per_sample = detail::get_u16(chunk + 22);
            if (spec.bits_per_sample != 16)
                throw ModemError(Errc::unsupported_format, std::to_string(spec.bits_per_sample) + "-bit samples");
            if (spec.channel_count != 1 && spec.channel_count != 2)
                throw ModemError(Errc::unsupported_format, std::to_string(spec.channel_count) + " channels");
            if (spec.sample_rate_hz <= 0) throw ModemError(Errc::corrupt_file, "invalid sample rate");
            have_fmt = true;
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            data = bytes.data() + body;
            data_size = size;
            break;
        }
        pos = body + size + (size & 1); // chunks are word aligned
    }

    if (!have_fmt) throw ModemError(Errc::corrupt_file, "no fmt chunk before data");
    if (!data) throw ModemError(Errc::corrupt_file, "no data chunk");
    const std::size_t frame_bytes = static_cast<std::size_t>(spec.channel_count) * 2;
    const std::size_t frames = data_size / frame_bytes;
    if (frames == 0) throw ModemError(Errc::corrupt_file, "empty data chunk");

    std::vector<std::vector<double>> ch(static_cast<std::size_t>(spec.channel_count), std::vector<double>(frames));
    for (std::size_t k = 0; k < frames; ++k)
        for (std::size_t c = 0; c < ch.size(); ++c) {
            const auto v = static_cast<std::int16_t>(detail::get_u16(data + k * frame_bytes + c * 2));
            ch[c][k] = v / 32767.0;
        }

    if (ch.size() == 1) return {AudioSignal(std::move(ch[0]), spec.sample_rate_hz), spec};
    return {AudioSignal(std::move(ch[0]), std::move(ch[1]), spec.sample_rate_hz), spec};
}

inline DecodedWav read_wav(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ModemError(Errc::io, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode_wav(bytes);
}

} // namespace umodem
