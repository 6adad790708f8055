#pragma once

#include "umodem/error.hpp"
#include "umodem/signal.hpp"
#include "umodem/spectrum.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace umodem {

enum class NoiseKind { white, lowpass_music, lowpass_voice, broadband_jangle };

inline std::string_view to_string(NoiseKind kind) {
    switch (kind) {
    case NoiseKind::white: return "white";
    case NoiseKind::lowpass_music: return "lowpass_music";
    case NoiseKind::lowpass_voice: return "lowpass_voice";
    case NoiseKind::broadband_jangle: return "broadband_jangle";
    }
    return "white";
}

inline std::optional<NoiseKind> parse_noise_kind(std::string_view s) {
    for (NoiseKind k : {NoiseKind::white, NoiseKind::lowpass_music, NoiseKind::lowpass_voice,
                        NoiseKind::broadband_jangle})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

struct NoiseSpec {
    NoiseKind kind = NoiseKind::white;
    double snr_db_at_carrier = 20.0;
    double carrier_hz = 19200.0;
};

struct ChannelSpec {
    std::size_t delay_samples = 0;
    double gain = 1.0;
    std::optional<NoiseSpec> noise;
    std::uint64_t seed = 0;
};

struct ChannelResult {
    AudioSignal signal;
    std::size_t clipped_samples = 0;
    bool clipping_warning = false; // more than 1% of samples clipped
    double noise_scale = 0.0;
};

// SNR is measured on this frame size.
inline constexpr std::size_t kSnrFftSize = 4096;

// splitmix64 finaliser; combines seeds into well-spread derived seeds.
constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0) noexcept {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace detail {

inline std::vector<double> gaussian(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

// Two cascaded one-pole low-pass sections (12 dB/octave above the corner).
inline void lowpass2(std::vector<double>& v, double corner_hz, int sample_rate_hz) {
    const double a = std::exp(-2.0 * std::numbers::pi * corner_hz / sample_rate_hz);
    for (int pass = 0; pass < 2; ++pass) {
        double y = 0.0;
        for (double& x : v) {
            y = a * y + (1.0 - a) * x;
            x = y;
        }
    }
}

inline void normalise_rms(std::vector<double>& v) {
    double e = 0.0;
    for (double x : v) e += x * x;
    if (e <= 0.0) return;
    const double s = 1.0 / std::sqrt(e / static_cast<double>(v.size()));
    for (double& x : v) x *= s;
}

} // namespace detail

// Seeded synthetic background noise.
//   white            flat Gaussian
//   lowpass_voice    Gaussian through a 2 kHz second-order low-pass
//   lowpass_music    Gaussian through a 4 kHz second-order low-pass
//   broadband_jangle flat Gaussian under a bursty envelope (random decaying impacts)
inline AudioSignal synth_noise(NoiseKind kind, std::size_t num_samples, int sample_rate_hz, std::uint64_t seed) {
    if (num_samples == 0) throw ModemError(Errc::insufficient_data, "noise needs at least one sample");
    if (sample_rate_hz <= 0) throw ModemError(Errc::config, "sample rate must be positive");

    auto v = detail::gaussian(num_samples, seed);
    switch (kind) {
    case NoiseKind::white:
        break;
    case NoiseKind::lowpass_voice:
        detail::lowpass2(v, 2000.0, sample_rate_hz);
        detail::normalise_rms(v);
        break;
    case NoiseKind::lowpass_music:
        detail::lowpass2(v, 4000.0, sample_rate_hz);
        detail::normalise_rms(v);
        break;
    case NoiseKind::broadband_jangle: {
        std::mt19937_64 rng(mix_seed(seed, 0x6a616e67));
        // ~20 impacts per second, 10 ms decay, over a 0.2 floor
        std::exponential_distribution<double> gap(20.0 / sample_rate_hz);
        std::uniform_real_distribution<double> strength(0.5, 1.5);
        const double decay = std::exp(-1.0 / (0.010 * sample_rate_hz));
        std::vector<double> env(num_samples, 0.0);
        double next = gap(rng);
        double level = 0.0;
        for (std::size_t k = 0; k < num_samples; ++k) {
            while (static_cast<double>(k) >= next) {
                level += strength(rng);
                next += gap(rng);
            }
            env[k] = 0.2 + level;
            level *= decay;
        }
        for (std::size_t k = 0; k < num_samples; ++k) v[k] *= env[k];
        detail::normalise_rms(v);
        break;
    }
    }
    return AudioSignal(std::move(v), sample_rate_hz);
}

// 10 log10 of the ratio of mean carrier-bin power (4096-point rectangular frames).
// Returns +infinity when the noise has no power at the carrier.
inline double measure_snr_at(const AudioSignal& signal, const AudioSignal& noise, double carrier_hz) {
    if (signal.sample_rate() != noise.sample_rate())
        throw ModemError(Errc::incompatible_signal, "sample rates differ");
    if (signal.size() < kSnrFftSize || noise.size() < kSnrFftSize)
        throw ModemError(Errc::insufficient_data, "SNR measurement needs at least 4096 samples");
    const AudioSignal s = mixdown(signal);
    const AudioSignal n = mixdown(noise);
    const double ps = carrier_bin_power(s.channel(0), s.sample_rate(), carrier_hz, kSnrFftSize);
    const double pn = carrier_bin_power(n.channel(0), n.sample_rate(), carrier_hz, kSnrFftSize);
    if (pn <= 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(ps / pn);
}

// gain, then delay (leading zeros), then receiver noise scaled so the carrier-bin SNR
// against the delayed signal equals the requested value, then clipping to [-1, 1].
// Stereo channels receive independent noise, each scaled against its own channel.
inline ChannelResult apply_channel(const AudioSignal& signal, const ChannelSpec& spec) {
    if (!(spec.gain > 0.0)) throw ModemError(Errc::config, "channel gain must be positive");

    const std::size_t n = signal.size() + spec.delay_samples;
    std::vector<std::vector<double>> out(static_cast<std::size_t>(signal.channel_count()));
    ChannelResult result{AudioSignal(std::vector<double>(1, 0.0), signal.sample_rate())};

    for (int c = 0; c < signal.channel_count(); ++c) {
        auto& dst = out[static_cast<std::size_t>(c)];
        dst.assign(n, 0.0);
        const auto src = signal.channel(c);
        for (std::size_t k = 0; k < src.size(); ++k) dst[spec.delay_samples + k] = spec.gain * src[k];

        if (spec.noise) {
            check_below_nyquist(spec.noise->carrier_hz, signal.sample_rate());
            const AudioSignal noise =
                synth_noise(spec.noise->kind, n, signal.sample_rate(), mix_seed(spec.seed, static_cast<std::uint64_t>(c)));
            const auto nv = noise.channel(0);
            const double ps = carrier_bin_power(dst, signal.sample_rate(), spec.noise->carrier_hz, kSnrFftSize);
            const double pn = carrier_bin_power(nv, signal.sample_rate(), spec.noise->carrier_hz, kSnrFftSize);
            double scale = 0.0;
            if (ps > 0.0 && pn > 0.0) scale = std::sqrt(ps / (pn * std::pow(10.0, spec.noise->snr_db_at_carrier / 10.0)));
            if (c == 0) result.noise_scale = scale;
            for (std::size_t k = 0; k < n; ++k) dst[k] += scale * nv[k];
        }

        for (double& x : dst) {
            if (x > 1.0) {
                x = 1.0;
                ++result.clipped_samples;
            } else if (x < -1.0) {
                x = -1.0;
                ++result.clipped_samples;
            }
        }
    }

    result.clipping_warning =
        static_cast<double>(result.clipped_samples) > 0.01 * static_cast<double>(n * out.size());
    result.signal = out.size() == 1 ? AudioSignal(std::move(out[0]), signal.sample_rate())
                                    : AudioSignal(std::move(out[0]), std::move(out[1]), signal.sample_rate());
    return result;
}

} // namespace umodem
