#pragma once

#include "umodem/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace umodem {

using Bit = std::uint8_t;
using BitStream = std::vector<Bit>;

// Sampled real waveform, one or two channels of equal length.
// Samples are nominally in [-1, 1]; integer PCM only exists at the WAV boundary.
class AudioSignal {
public:
    AudioSignal(std::vector<double> mono, int sample_rate_hz)
        : sample_rate_(sample_rate_hz) {
        channels_.push_back(std::move(mono));
        check();
    }

    AudioSignal(std::vector<double> left, std::vector<double> right, int sample_rate_hz)
        : sample_rate_(sample_rate_hz) {
        channels_.push_back(std::move(left));
        channels_.push_back(std::move(right));
        check();
    }

    int sample_rate() const noexcept { return sample_rate_; }
    int channel_count() const noexcept { return static_cast<int>(channels_.size()); }
    std::size_t size() const noexcept { return channels_.front().size(); }
    bool is_mono() const noexcept { return channels_.size() == 1; }
    double duration_s() const noexcept { return static_cast<double>(size()) / sample_rate_; }

    std::span<const double> channel(int index) const { return channels_.at(static_cast<std::size_t>(index)); }
    std::span<double> channel(int index) { return channels_.at(static_cast<std::size_t>(index)); }

    // Mono sample view; stereo signals must be mixed down first.
    std::span<const double> samples() const {
        if (!is_mono())
            throw ModemError(Errc::incompatible_signal, "expected a mono signal");
        return channels_.front();
    }
    std::span<double> samples() {
        if (!is_mono())
            throw ModemError(Errc::incompatible_signal, "expected a mono signal");
        return channels_.front();
    }

    double peak() const noexcept {
        double p = 0.0;
        for (const auto& ch : channels_)
            for (double s : ch)
                p = std::max(p, std::abs(s));
        return p;
    }

    friend bool operator==(const AudioSignal&, const AudioSignal&) = default;

private:
    void check() const {
        if (sample_rate_ <= 0)
            throw ModemError(Errc::config, "sample rate must be positive");
        if (channels_.front().empty())
            throw ModemError(Errc::insufficient_data, "signal must hold at least one sample");
        for (const auto& ch : channels_)
            if (ch.size() != channels_.front().size())
                throw ModemError(Errc::incompatible_signal, "channel lengths differ");
    }

    std::vector<std::vector<double>> channels_;
    int sample_rate_;
};

inline void check_below_nyquist(double freq_hz, int sample_rate_hz) {
    if (!(freq_hz >= 0.0) || freq_hz >= sample_rate_hz / 2.0)
        throw ModemError(Errc::nyquist_violation,
                         std::to_string(freq_hz) + " Hz is not below half of " +
                             std::to_string(sample_rate_hz) + " Hz");
}

// sample[k] = amplitude * cos(2*pi*freq*k/sr + phase)
inline AudioSignal generate_tone(double freq_hz, std::size_t num_samples, double amplitude,
                                 double phase_rad, int sample_rate_hz) {
    if (sample_rate_hz <= 0)
        throw ModemError(Errc::config, "sample rate must be positive");
    check_below_nyquist(freq_hz, sample_rate_hz);
    if (amplitude < 0.0)
        throw ModemError(Errc::config, "amplitude must be non-negative");
    if (num_samples == 0)
        throw ModemError(Errc::insufficient_data, "tone needs at least one sample");

    std::vector<double> out(num_samples);
    const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate_hz;
    for (std::size_t k = 0; k < num_samples; ++k)
        out[k] = amplitude * std::cos(w * static_cast<double>(k) + phase_rad);
    return AudioSignal(std::move(out), sample_rate_hz);
}

enum class PadMode { strict, zero_pad };

// Element-wise sum. With PadMode::zero_pad the shorter signal is extended with zeros.
inline AudioSignal mix(const AudioSignal& a, const AudioSignal& b, PadMode pad = PadMode::strict) {
    if (a.sample_rate() != b.sample_rate())
        throw ModemError(Errc::incompatible_signal, "sample rates differ");
    if (a.channel_count() != b.channel_count())
        throw ModemError(Errc::incompatible_signal, "channel counts differ");
    if (a.size() != b.size() && pad == PadMode::strict)
        throw ModemError(Errc::incompatible_signal, "lengths differ");

    const std::size_t n = std::max(a.size(), b.size());
    std::vector<std::vector<double>> out(static_cast<std::size_t>(a.channel_count()),
                                         std::vector<double>(n, 0.0));
    for (int c = 0; c < a.channel_count(); ++c) {
        auto& dst = out[static_cast<std::size_t>(c)];
        auto sa = a.channel(c);
        auto sb = b.channel(c);
        for (std::size_t k = 0; k < sa.size(); ++k) dst[k] += sa[k];
        for (std::size_t k = 0; k < sb.size(); ++k) dst[k] += sb[k];
    }
    if (out.size() == 1)
        return AudioSignal(std::move(out[0]), a.sample_rate());
    return AudioSignal(std::move(out[0]), std::move(out[1]), a.sample_rate());
}

inline AudioSignal scale(const AudioSignal& s, double factor) {
    auto apply = [&](std::span<const double> ch) {
        std::vector<double> v(ch.begin(), ch.end());
        for (double& x : v) x *= factor;
        return v;
    };
    if (s.is_mono())
        return AudioSignal(apply(s.channel(0)), s.sample_rate());
    return AudioSignal(apply(s.channel(0)), apply(s.channel(1)), s.sample_rate());
}

inline AudioSignal negate(const AudioSignal& s) { return scale(s, -1.0); }

// Mean of the channels. A single microphone hears both speaker channels; averaging
// keeps the result inside [-1, 1]. Detection is ratio-based, so the scale is irrelevant.
inline AudioSignal mixdown(const AudioSignal& s) {
    if (s.is_mono()) return s;
    auto l = s.channel(0);
    auto r = s.channel(1);
    std::vector<double> out(s.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = 0.5 * (l[k] + r[k]);
    return AudioSignal(std::move(out), s.sample_rate());
}

// 1 -> +1, 0 -> -1
inline std::vector<int> to_bipolar(std::span<const Bit> bits) {
    std::vector<int> out;
    out.reserve(bits.size());
    for (Bit b : bits) out.push_back(b ? 1 : -1);
    return out;
}

inline BitStream from_bipolar(std::span<const int> values) {
    BitStream out;
    out.reserve(values.size());
    for (int v : values) out.push_back(v > 0 ? 1 : 0);
    return out;
}

inline BitStream complement(std::span<const Bit> bits) {
    BitStream out;
    out.reserve(bits.size());
    for (Bit b : bits) out.push_back(b ? 0 : 1);
    return out;
}

} // namespace umodem
